"""Small shared helpers: RNG construction and principal-interval wrapping."""

from __future__ import annotations

import numpy as np


def as_rng(seed) -> np.random.Generator:
    """Return a numpy Generator; existing Generators pass through unchanged.

    Accepts anything ``np.random.default_rng`` accepts, in particular tuples
    of integers, which the experiment driver uses to derive independent
    per-trial streams.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def wrap_offset(f):
    """Wrap normalized frequency offsets into [-1/2, 1/2)."""
    wrapped = (np.asarray(f, dtype=float) + 0.5) % 1.0 - 0.5
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def wrap_offset_error(f):
    """Wrap frequency differences into (-1/2, 1/2] (estimates live modulo 1)."""
    wrapped = -((-np.asarray(f, dtype=float) + 0.5) % 1.0 - 0.5)
    return float(wrapped) if wrapped.ndim == 0 else wrapped
