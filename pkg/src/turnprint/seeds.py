"""Deterministic seed derivation for every randomized component.

All randomness in the package flows from one root seed.  Component seeds are
derived by hashing the root together with a string path, so adding a new
consumer never shifts the random streams of existing ones, and the same
(root, path) pair yields the same seed on every platform and Python version.
"""

from __future__ import annotations

import hashlib


def derive_seed(root: int, *path: object) -> int:
    """Derive a 64-bit child seed from a root seed and a label path.

    Uses SHA-256 over a canonical encoding of (root, path), so results are
    stable across runs and machines.  Path elements are converted with str().
    """
    material = repr((int(root),) + tuple(str(p) for p in path)).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return int.from_bytes(digest[:8], "big")
