"""Pilot-aided frequency-offset estimation, the comparison method.

Each user prepends a known random pilot. Correlating the received branches
against a pilot swept across candidate frequencies gives a periodogram-like
objective per user; the offset estimate is the interpolated peak location.
Users' pilots are drawn until mutually near-orthogonal so the per-user
objectives do not leak into each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cfo import CfoEstimates
from .errors import InvalidConfigurationError, NoPeakError, PilotGenerationError
from .sigmodel import Constellation
from .util import as_rng, wrap_offset

#: pairwise normalized correlation bound pilots must satisfy
MAX_PILOT_CORRELATION = 0.3
DEFAULT_RETRIES = 100


@dataclass(frozen=True)
class PilotSet:
    """K x L known pilot symbols, pairwise nearly orthogonal across users."""

    pilots: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pilots", np.atleast_2d(np.asarray(self.pilots, dtype=complex)))

    @property
    def n_users(self) -> int:
        return self.pilots.shape[0]

    @property
    def length(self) -> int:
        return self.pilots.shape[1]


def _max_cross_correlation(pilots: np.ndarray) -> float:
    if pilots.shape[0] < 2:
        return 0.0
    norms = np.linalg.norm(pilots, axis=1)
    corr = np.abs(pilots @ pilots.conj().T) / np.outer(norms, norms)
    np.fill_diagonal(corr, 0.0)
    return float(corr.max())


def generate_pilots(
    n_users: int,
    length: int,
    constellation: Constellation,
    seed,
    max_retries: int = DEFAULT_RETRIES,
) -> PilotSet:
    """Draw random pilots until the pairwise-correlation bound holds.

    Raises PilotGenerationError once the retry budget is exhausted, so a
    hard-to-satisfy configuration fails loudly rather than silently
    degrading the estimator.
    """
    if length < 8:
        raise InvalidConfigurationError("pilot length must be at least 8")
    rng = as_rng(seed)
    for _ in range(max_retries):
        idx = rng.integers(0, constellation.order, size=(n_users, length))
        pilots = constellation.points[idx]
        if _max_cross_correlation(pilots) < MAX_PILOT_CORRELATION:
            return PilotSet(pilots)
    raise PilotGenerationError(
        f"no pilot set with pairwise correlation below {MAX_PILOT_CORRELATION} "
        f"in {max_retries} draws (K={n_users}, L={length})"
    )


def pilot_cfo_estimate(
    pilot_observations,
    pilots: PilotSet,
    grid_step: float | None = None,
) -> CfoEstimates:
    """Per-user offset estimate from the pilot-bearing observation prefix.

    For each user, sweep a candidate frequency over [-1/2, 1/2): correlate
    every branch against the pilot counter-rotated at that frequency and sum
    the squared magnitudes. The estimate is the grid peak refined by
    quadratic interpolation of the objective (the grid wraps, so edge peaks
    interpolate cleanly too).
    """
    y = np.asarray(
        pilot_observations.samples if hasattr(pilot_observations, "samples") else pilot_observations,
        dtype=complex,
    )
    if y.ndim != 2:
        raise InvalidConfigurationError("pilot observations must be branch-by-sample")
    length = pilots.length
    if y.shape[1] != length:
        raise InvalidConfigurationError(
            f"observation prefix spans {y.shape[1]} symbols but pilots have length {length}"
        )
    if grid_step is None:
        grid_step = 1.0 / (8 * length)
    if length * grid_step > 1.0:
        raise InvalidConfigurationError("grid step too coarse to resolve the correlation main lobe")
    n_points = int(round(1.0 / grid_step))
    grid = -0.5 + grid_step * np.arange(n_points)
    sweep = np.exp(-2j * np.pi * np.outer(grid, np.arange(length)))
    offsets = np.empty(pilots.n_users)
    for k in range(pilots.n_users):
        weighted = y * pilots.pilots[k].conj()[None, :]
        objective = np.sum(np.abs(weighted @ sweep.T) ** 2, axis=0)
        peak = float(objective.max())
        if peak <= 0.0 or peak - float(objective.min()) <= 1e-12 * peak:
            raise NoPeakError(f"flat correlation objective for user {k}")
        g = int(np.argmax(objective))
        y_prev = objective[(g - 1) % n_points]
        y_next = objective[(g + 1) % n_points]
        denom = y_prev - 2.0 * objective[g] + y_next
        shift = 0.0 if denom == 0.0 else 0.5 * (y_prev - y_next) / denom
        shift = float(np.clip(shift, -0.5, 0.5))
        offsets[k] = grid[g] + shift * grid_step
    return CfoEstimates(wrap_offset(offsets))


def match_streams_to_pilots(
    stream_prefix: np.ndarray,
    pilots: PilotSet,
    estimates: CfoEstimates,
) -> np.ndarray:
    """Identify which separated stream carries which user's pilot.

    Correlates each stream's pilot-region samples against every user's
    pilot counter-rotated at that user's estimated offset, then picks the
    assignment maximizing the total correlation (exhaustive, K is small).
    Returns ``user_to_stream`` with one stream index per user.
    """
    streams = np.atleast_2d(np.asarray(stream_prefix, dtype=complex))
    n_streams = streams.shape[0]
    if n_streams != pilots.n_users:
        raise InvalidConfigurationError("stream count must match pilot count")
    if streams.shape[1] != pilots.length:
        raise InvalidConfigurationError("stream prefix must span the pilot length")
    i = np.arange(pilots.length)
    score = np.empty((n_streams, pilots.n_users))
    for k in range(pilots.n_users):
        probe = pilots.pilots[k].conj() * np.exp(-2j * np.pi * estimates.offsets[k] * i)
        score[:, k] = np.abs(streams @ probe)
    best_total = -np.inf
    best = None
    for perm in itertools.permutations(range(n_streams)):
        total = sum(score[perm[k], k] for k in range(pilots.n_users))
        if total > best_total:
            best_total = total
            best = perm
    return np.array(best, dtype=int)
