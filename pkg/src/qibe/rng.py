"""Seedable, splittable randomness.

Every sampling operation in the package takes an explicit
``numpy.random.Generator``. Helpers here cover the three ways one is made:
from a user seed, derived deterministically from secret key material plus
context labels (a PRF-style stream, used for per-identity keys), or split
off an existing generator for an independent stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["make_rng", "derive_rng", "split_rng"]


def make_rng(seed: int | bytes | None = None) -> np.random.Generator:
    """Return a fresh generator; ``None`` seeds from OS entropy."""
    if seed is None:
        return np.random.default_rng()
    if isinstance(seed, bytes):
        seed = int.from_bytes(hashlib.sha256(seed).digest(), "little")
    if isinstance(seed, int) and seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.default_rng(seed)


def derive_rng(key: bytes, *context: bytes | str) -> np.random.Generator:
    """Deterministic generator keyed by ``key`` and domain-separated context.

    The stream is a function of (key, context) only, so repeated calls with
    the same inputs replay identical randomness. This is how the oracle-key
    backend turns its master seed into per-identity Gaussian matrices.
    """
    h = hashlib.sha256(key)
    for part in context:
        if isinstance(part, str):
            part = part.encode()
        # Length-prefix each part so ("ab","c") and ("a","bc") differ.
        h.update(len(part).to_bytes(8, "little"))
        h.update(part)
    return np.random.default_rng(int.from_bytes(h.digest(), "little"))


def split_rng(rng: np.random.Generator) -> np.random.Generator:
    """Spawn an independent child stream from ``rng``."""
    return rng.spawn(1)[0]
