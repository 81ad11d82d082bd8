"""Coarse frequency-offset estimation from the mixing-matrix phase structure.

Down each estimated mixing column the phase advances linearly with the
branch index, at 2*pi*f/P per branch; the unknown per-column constant
(channel phase plus separation ambiguity) shifts the line without tilting
it. Unwrapping each column and fitting a straight line therefore reads the
normalized offset straight out of the slope, over the full identifiable
range [-1/2, 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError, UnfittableColumnError
from .util import wrap_offset

#: entries below this fraction of their column's peak modulus carry no
#: usable phase (pulse nulls) and are excluded from the fit
MODULUS_FLOOR = 1e-6


@dataclass(frozen=True)
class PhaseMatrix:
    """Per-entry phases of a mixing estimate plus a usability mask."""

    phases: np.ndarray  # P x K, radians in (-pi, pi]
    valid: np.ndarray  # P x K bool


@dataclass(frozen=True)
class CfoEstimates:
    """Estimated normalized frequency offsets, one per stream, in [-1/2, 1/2)."""

    offsets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offsets", np.atleast_1d(np.asarray(self.offsets, dtype=float)))


def phase_matrix(mixing: np.ndarray) -> PhaseMatrix:
    """Take entrywise phases of the mixing estimate, masking negligible entries."""
    a = np.atleast_2d(np.asarray(mixing, dtype=complex))
    modulus = np.abs(a)
    column_peak = modulus.max(axis=0)
    if np.any(column_peak == 0.0):
        dead = int(np.flatnonzero(column_peak == 0.0)[0])
        raise UnfittableColumnError(f"mixing column {dead} is identically zero")
    valid = modulus >= MODULUS_FLOOR * column_peak
    return PhaseMatrix(phases=np.angle(a), valid=valid)


def fit_cfo(phases: PhaseMatrix, oversampling: int) -> CfoEstimates:
    """Fit one normalized frequency offset per mixing column.

    Per column: unwrap the valid phases down the branch index (successive
    differences forced into (-pi, pi], unambiguous since the per-branch step
    is at most pi/2 in magnitude for admissible offsets), fit an ordinary
    least-squares line against the 1-based branch index, and scale the slope
    by P/(2*pi). With every branch valid this is exactly the closed-form
    linear fit over P points. Results are wrapped into [-1/2, 1/2).
    """
    psi = phases.phases
    valid = phases.valid
    p, k = psi.shape
    if oversampling != p:
        raise InvalidConfigurationError(
            f"phase matrix has {p} rows but oversampling factor is {oversampling}"
        )
    branch = np.arange(1, p + 1, dtype=float)
    offsets = np.empty(k)
    for j in range(k):
        usable = valid[:, j]
        if int(usable.sum()) < 2:
            raise UnfittableColumnError(f"column {j} has fewer than two usable phases")
        line = np.unwrap(psi[usable, j])
        slope = np.polyfit(branch[usable], line, 1)[0]
        offsets[j] = slope * p / (2.0 * np.pi)
    return CfoEstimates(wrap_offset(offsets))


def derotate(streams: np.ndarray, estimates) -> np.ndarray:
    """Remove the estimated rotation exp(j*2*pi*f_k*i) from each stream.

    Stream order must match the mixing-column order the estimates came
    from; both sides of the pipeline are shuffled by the same separation
    permutation, so row k here always pairs with offset k.
    """
    s = np.atleast_2d(np.asarray(streams, dtype=complex))
    f = estimates.offsets if isinstance(estimates, CfoEstimates) else np.asarray(estimates, dtype=float)
    i = np.arange(s.shape[1])
    return s * np.exp(-2j * np.pi * np.outer(f, i))
