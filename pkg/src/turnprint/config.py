"""Run configuration shared by the CLI and the evaluation harness.

One dataclass holds every tunable the pipeline exposes.  Values are
serializable to and from a small TOML file so any run can be reproduced
from (config file, input files, seed) alone.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml


class ConfigError(Exception):
    """Raised for out-of-range or malformed configuration."""


@dataclass
class RunConfig:
    """Pipeline parameters with their documented defaults.

    delta_bump      yaw-rate magnitude (rad/s) that triggers steering detection
    epsilon         boundary tolerance (rad/s) for extending event edges
    cutoff_hz       low-pass cutoff applied to yaw and acceleration channels
    interp_len      number of samples each turn is resampled to (5 stages)
    seed            root seed; all component seeds are derived from it
    folds           cross-validation fold count
    gmm_k           mixture components per enrolled driver
    gate_threshold  mean per-vector log-density above which a trip matches
    priors          per-class prior probabilities; None means uniform
    """

    delta_bump: float = 0.15
    epsilon: float = 0.02
    cutoff_hz: float = 2.0
    interp_len: int = 100
    seed: int = 0
    folds: int = 10
    gmm_k: int = 2
    gate_threshold: float = 0.0
    priors: dict[str, float] | None = field(default=None)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not self.delta_bump > 0:
            raise ConfigError(f"delta_bump must be positive, got {self.delta_bump}")
        if not 0 < self.epsilon < self.delta_bump:
            raise ConfigError(
                f"epsilon must lie in (0, delta_bump), got {self.epsilon}"
            )
        if not self.cutoff_hz > 0:
            raise ConfigError(f"cutoff_hz must be positive, got {self.cutoff_hz}")
        if self.interp_len < 20 or self.interp_len % 5 != 0:
            raise ConfigError(
                f"interp_len must be >= 20 and divisible by 5, got {self.interp_len}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.gmm_k < 1:
            raise ConfigError(f"gmm_k must be >= 1, got {self.gmm_k}")
        if self.priors is not None:
            if not self.priors:
                raise ConfigError("priors table must not be empty; omit for uniform")
            total = sum(self.priors.values())
            if any(p <= 0 for p in self.priors.values()):
                raise ConfigError("priors must all be positive")
            if abs(total - 1.0) > 1e-6:
                raise ConfigError(f"priors must sum to 1, got {total}")

    def replace(self, **kwargs) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)

    def to_toml(self) -> str:
        """Render as TOML text (the same format from_file parses)."""
        lines = [
            f"delta_bump = {self.delta_bump!r}",
            f"epsilon = {self.epsilon!r}",
            f"cutoff_hz = {self.cutoff_hz!r}",
            f"interp_len = {self.interp_len}",
            f"seed = {self.seed}",
            f"folds = {self.folds}",
            f"gmm_k = {self.gmm_k}",
            f"gate_threshold = {self.gate_threshold!r}",
        ]
        if self.priors is not None:
            lines.append("")
            lines.append("[priors]")
            for label in sorted(self.priors):
                lines.append(f'"{label}" = {self.priors[label]!r}')
        return "\n".join(lines) + "\n"

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_toml())

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, "rb") as fh:
                raw = _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"bad config value types: {exc}") from exc
