"""Decision-feedback phase-locked loop and the composed blind receiver.

The loop is second order (proportional phase gain plus a frequency
integrator) and decision directed: each sample is derotated by the tracked
phase, sliced to the nearest constellation point, and the angular error
between the two drives both the frequency word and the phase. Because the
slicer only sees phase modulo the constellation symmetry, a bare loop can
only acquire offsets up to 1/(2M) cycles/symbol (1/8 for 4QAM); feeding it
a stream whose offset was already removed by the coarse estimator extends
the usable range to the full [-1/2, 1/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .bss import SeparationResult, estimate_mixing, ls_equalize
from .cfo import CfoEstimates, derotate, fit_cfo, phase_matrix
from .errors import InvalidConfigurationError
from .sigmodel import Constellation
from .util import wrap_offset

#: consecutive small-error samples required to declare lock
LOCK_WINDOW = 200
#: |phase error| threshold (radians) for the lock detector
LOCK_THRESHOLD = 0.1


@dataclass(frozen=True)
class PllConfig:
    """Loop gains and initial frequency word (cycles/symbol)."""

    phase_gain: float = 0.1
    freq_gain: float = 0.001
    f_init: float = 0.0

    def __post_init__(self):
        if self.phase_gain <= 0.0 or self.freq_gain <= 0.0:
            raise InvalidConfigurationError("loop gains must be positive")
        if self.phase_gain >= 1.0:
            raise InvalidConfigurationError("phase gain must be below 1 for stability")


@dataclass(frozen=True)
class PllTrace:
    """Per-sample record of one tracking run."""

    corrected: np.ndarray  # derotated samples
    decisions: np.ndarray  # constellation indices
    phase_history: np.ndarray  # radians, wrapped to (-pi, pi]
    freq_history: np.ndarray  # cycles/symbol, wrapped to [-1/2, 1/2)
    errors: np.ndarray  # detector output, radians
    locked_at: int | None  # start of the first 200-sample low-error run

    def steady_state_freq(self, window: int = LOCK_WINDOW) -> float:
        """Mean loop frequency over the trailing window (cycles/symbol)."""
        return float(np.mean(self.freq_history[-window:]))


def _first_lock(errors: np.ndarray) -> int | None:
    small = np.abs(errors) < LOCK_THRESHOLD
    if small.size < LOCK_WINDOW:
        return None
    runs = np.convolve(small.astype(int), np.ones(LOCK_WINDOW, dtype=int), mode="valid")
    hits = np.flatnonzero(runs == LOCK_WINDOW)
    return int(hits[0]) if hits.size else None


def pll_track(stream, constellation: Constellation, config: PllConfig | None = None) -> PllTrace:
    """Track residual frequency and phase on one symbol stream.

    Per sample: derotate by the loop phase, slice to the nearest
    constellation point, and feed the angle between sample and decision
    back into the frequency word (integrator) and the phase (proportional
    term plus the frequency advance).
    """
    cfg = config if config is not None else PllConfig()
    samples = np.atleast_1d(np.asarray(stream, dtype=complex))
    n = samples.size
    if n == 0:
        raise InvalidConfigurationError("cannot track an empty stream")
    points = [complex(pt) for pt in constellation.points]
    corrected = np.empty(n, dtype=complex)
    decisions = np.empty(n, dtype=np.int64)
    phase_history = np.empty(n)
    freq_history = np.empty(n)
    errors = np.empty(n)
    phase = 0.0
    freq = float(cfg.f_init)
    two_pi = 2.0 * math.pi
    for i in range(n):
        u = complex(samples[i]) * cmath.exp(-1j * phase)
        best = 0
        best_dist = abs(u - points[0])
        for idx in range(1, len(points)):
            dist = abs(u - points[idx])
            if dist < best_dist:
                best = idx
                best_dist = dist
        err = cmath.phase(u * points[best].conjugate())
        freq += cfg.freq_gain * err
        freq = (freq + 0.5) % 1.0 - 0.5
        phase = math.remainder(phase + cfg.phase_gain * err + two_pi * freq, two_pi)
        corrected[i] = u
        decisions[i] = best
        phase_history[i] = phase
        freq_history[i] = freq
        errors[i] = err
    return PllTrace(
        corrected=corrected,
        decisions=decisions,
        phase_history=phase_history,
        freq_history=freq_history,
        errors=errors,
        locked_at=_first_lock(errors),
    )


@dataclass(frozen=True)
class ReceiverResult:
    """Everything the blind receiver produced for one frame."""

    separation: SeparationResult
    cfo: CfoEstimates
    traces: list

    @property
    def decisions(self) -> np.ndarray:
        return np.vstack([t.decisions for t in self.traces])

    @property
    def recovered(self) -> np.ndarray:
        return np.vstack([t.corrected for t in self.traces])

    def total_offsets(self) -> np.ndarray:
        """Coarse estimate plus the loop's steady-state frequency, per stream."""
        loop = np.array([t.steady_state_freq() for t in self.traces])
        return wrap_offset(self.cfo.offsets + loop)


def run_receiver(
    observations,
    n_sources: int,
    constellation: Constellation,
    config: PllConfig | None = None,
) -> ReceiverResult:
    """Full blind chain: separate, equalize, fit offsets, derotate, track.

    The loops start at frequency zero: the coarse estimate has already been
    removed by derotation, so each loop only sees the small residual.
    """
    separation = estimate_mixing(observations, n_sources)
    streams = ls_equalize(separation.mixing, observations)
    separation = replace(separation, streams=streams)
    estimates = fit_cfo(phase_matrix(separation.mixing), separation.mixing.shape[0])
    cleaned = derotate(streams, estimates)
    cfg = replace(config if config is not None else PllConfig(), f_init=0.0)
    traces = [pll_track(cleaned[k], constellation, cfg) for k in range(n_sources)]
    return ReceiverResult(separation=separation, cfo=estimates, traces=traces)
