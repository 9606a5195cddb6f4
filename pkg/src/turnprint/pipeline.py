"""End-to-end wiring: raw trace -> aligned -> turns -> feature vectors."""

from __future__ import annotations

from .config import RunConfig
from .features import FeatureVector, build_feature_vector
from .trace import RawTrace, align_to_geo_frame, despike, lowpass_smooth
from .turns import (
    TurnSegment,
    classify_and_filter_turns,
    detect_steering_events,
    interpolate_turn,
)


def extract_turns(
    raw: RawTrace, cfg: RunConfig | None = None, interpolate: bool = True
) -> list[TurnSegment]:
    """Run the full detection chain on one raw trace.

    Align to the geographic frame, despike, low-pass, detect steering
    events, keep the ones whose integrated heading lands in the 70-110
    degree band, and (by default) resample each to the configured length.
    """
    cfg = cfg or RunConfig()
    aligned = lowpass_smooth(despike(align_to_geo_frame(raw)), cfg.cutoff_hz)
    events = detect_steering_events(
        aligned, delta_bump=cfg.delta_bump, epsilon=cfg.epsilon
    )
    turns = classify_and_filter_turns(events)
    if interpolate:
        turns = [interpolate_turn(t, cfg.interp_len) for t in turns]
    return turns


def turns_to_vectors(
    turns: list[TurnSegment],
    label: str | None = None,
    interpolated: bool = True,
) -> list[FeatureVector]:
    return [
        build_feature_vector(t, label=label, interpolated=interpolated)
        for t in turns
    ]


def trace_to_vectors(
    raw: RawTrace,
    cfg: RunConfig | None = None,
    label: str | None = None,
    interpolate: bool = True,
) -> list[FeatureVector]:
    """Raw trace straight to labeled feature vectors."""
    turns = extract_turns(raw, cfg, interpolate=interpolate)
    return turns_to_vectors(turns, label=label, interpolated=interpolate)
