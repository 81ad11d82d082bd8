"""Blind estimation of the polyphase mixing matrix from fourth-order statistics.

The pipeline is the classical one for non-Gaussian linear mixtures:
dominant-subspace whitening, the full set of K^2 sample fourth-order
cumulant matrices of the whitened data, and Jacobi joint diagonalization
to recover the residual unitary factor. The product of the de-whitener
and that unitary estimates the mixing matrix up to column permutation and
per-column complex scale, which downstream stages treat as unknowns. A
least-squares equalizer then recovers the decoupled per-user streams,
still rotating at their individual frequency offsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMixtureError,
    InvalidConfigurationError,
    SingularEqualizerError,
)

_RANK_RTOL = 1e-12


def _samples(observations) -> np.ndarray:
    """Accept PolyphaseObservations or a bare branch-by-sample array."""
    if hasattr(observations, "samples"):
        return np.asarray(observations.samples)
    return np.asarray(observations)


@dataclass(frozen=True)
class Whitening:
    """Dominant-subspace whitener and the whitened data it produces."""

    transform: np.ndarray  # K x P
    whitened: np.ndarray  # K x N, sample covariance = identity
    mean: np.ndarray  # P, removed before whitening
    mean_removed: bool = True


@dataclass(frozen=True)
class CumulantSet:
    """Hermitian fourth-order cumulant matrices of a whitened K x N block."""

    matrices: list
    n_samples: int


@dataclass(frozen=True)
class SeparationResult:
    """Mixing estimate (up to column order/scale) and, once equalized, the streams."""

    mixing: np.ndarray  # P x K
    streams: np.ndarray | None = None  # K x N decoupled, still CFO-rotated


def whiten(observations, n_sources: int) -> Whitening:
    """Project onto the K dominant covariance eigenpairs and normalize them.

    Plain dominant-subspace whitening: no noise-floor subtraction, so at
    finite SNR the whitener is slightly biased toward the noise level.
    Raises DegenerateMixtureError when the sample covariance exposes fewer
    than ``n_sources`` directions.
    """
    y = _samples(observations)
    if y.ndim != 2:
        raise InvalidConfigurationError("observations must be a 2-D branch-by-sample array")
    p, n = y.shape
    if n_sources < 1 or n_sources > p:
        raise InvalidConfigurationError("source count must be in 1..P")
    if n <= p:
        raise InvalidConfigurationError("need more samples than branches to whiten")
    mean = y.mean(axis=1)
    centered = y - mean[:, None]
    cov = centered @ centered.conj().T / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    lam = eigvals[::-1][:n_sources]
    vecs = eigvecs[:, ::-1][:, :n_sources]
    if lam[0] <= 0.0 or lam[-1] <= lam[0] * _RANK_RTOL:
        raise DegenerateMixtureError(
            f"sample covariance rank below {n_sources}; mixture is degenerate"
        )
    transform = (vecs / np.sqrt(lam)).conj().T
    return Whitening(transform=transform, whitened=transform @ centered, mean=mean)


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


def cumulant_matrices(whitened: np.ndarray) -> CumulantSet:
    """Estimate the K^2 fourth-order cumulant matrices of whitened data.

    Entry (a, b) of the matrix for branch pair (p, q) is the sample cumulant
    Cum[z_a, z_b*, z_p, z_q*]: the raw fourth moment with all second-order
    (Gaussian) products removed, including the pseudo-covariance term so
    non-circular inputs are handled too. Matrix pairs (p, q)/(q, p) are
    adjoints of each other, so they are returned as their Hermitian and
    skew parts; every returned matrix is exactly Hermitian.

    Uses biased 1/N moment averages.
    """
    z = np.atleast_2d(np.asarray(whitened, dtype=complex))
    k, n = z.shape
    if n < k * k:
        raise InvalidConfigurationError("need at least K^2 samples for cumulant estimates")
    cov = z @ z.conj().T / n
    pseudo = z @ z.T / n
    raw = {}
    for p in range(k):
        for q in range(k):
            weights = z[p] * z[q].conj()
            m = (z * weights) @ z.conj().T / n
            m -= cov * cov[p, q]
            m -= np.outer(cov[:, q], cov[p, :])
            m -= np.outer(pseudo[:, p], pseudo[:, q].conj())
            raw[p, q] = m
    matrices = [_hermitian_part(raw[p, p]) for p in range(k)]
    for p in range(k):
        for q in range(p + 1, k):
            matrices.append(_hermitian_part((raw[p, q] + raw[q, p]) / 2.0))
            matrices.append(_hermitian_part((raw[p, q] - raw[q, p]) / 2.0j))
    return CumulantSet(matrices=matrices, n_samples=n)


def diagonal_mass(matrices) -> float:
    """Joint-diagonalization objective: total squared diagonal magnitude."""
    return float(sum(np.sum(np.abs(np.diagonal(m)) ** 2) for m in matrices))


def _best_rotation(matrices, p: int, q: int) -> tuple[float, complex]:
    """Closed-form 2x2 rotation maximizing the summed squared diagonals.

    Stacks per-matrix vectors [m_pp - m_qq, m_pq + m_qp, j(m_qp - m_pq)] and
    takes the dominant eigenvector of their real outer-product sum; the
    cos/sin of the optimal complex Givens rotation follow from it.
    """
    h = np.array(
        [
            [m[p, p] - m[q, q], m[p, q] + m[q, p], 1j * (m[q, p] - m[p, q])]
            for m in matrices
        ]
    )
    g = np.real(h.T @ h.conj())
    _, vecs = np.linalg.eigh(g)
    w = vecs[:, -1]
    if w[0] < 0.0:
        w = -w
    c = np.sqrt(0.5 + w[0] / 2.0)
    s = 0.5 * (w[1] - 1j * w[2]) / c
    return float(c), complex(s)


def joint_diagonalize(
    cumulants,
    sweep_tol: float | None = None,
    max_sweeps: int = 100,
    objective_history: list | None = None,
) -> np.ndarray:
    """Jointly diagonalize a set of K x K matrices with Jacobi sweeps.

    Sweeps all index pairs, applying at each the closed-form rotation that
    maximizes the summed squared diagonals; stops once every rotation's
    |sin| falls below ``sweep_tol`` (default 1e-8/sqrt(n_samples), i.e. at
    the statistical accuracy of the estimates) or after ``max_sweeps``.
    Always returns a unitary matrix; pass a list via ``objective_history``
    to record the objective before each sweep and after the last.
    """
    if isinstance(cumulants, CumulantSet):
        mats = [np.array(m, dtype=complex) for m in cumulants.matrices]
        n_samples = cumulants.n_samples
    else:
        mats = [np.array(m, dtype=complex) for m in cumulants]
        n_samples = None
    if not mats:
        raise InvalidConfigurationError("cannot diagonalize an empty matrix set")
    if sweep_tol is None:
        sweep_tol = 1e-8 if n_samples is None else 1e-8 / np.sqrt(n_samples)
    k = mats[0].shape[0]
    v = np.eye(k, dtype=complex)
    for _ in range(max_sweeps):
        if objective_history is not None:
            objective_history.append(diagonal_mass(mats))
        largest = 0.0
        for p in range(k - 1):
            for q in range(p + 1, k):
                c, s = _best_rotation(mats, p, q)
                largest = max(largest, abs(s))
                if abs(s) <= sweep_tol:
                    continue
                rot = np.array([[c, -np.conj(s)], [s, c]])
                for m in mats:
                    m[[p, q], :] = rot.conj().T @ m[[p, q], :]
                    m[:, [p, q]] = m[:, [p, q]] @ rot
                v[:, [p, q]] = v[:, [p, q]] @ rot
        if largest <= sweep_tol:
            break
    if objective_history is not None:
        objective_history.append(diagonal_mass(mats))
    return v


def estimate_mixing(observations, n_sources: int) -> SeparationResult:
    """Blindly estimate the P x K mixing matrix from the observations alone.

    Equals the true mixing up to a column permutation and a unit-modulus
    per-column scale, plus estimation error that shrinks with the sample
    count. Column order is whatever the diagonalizer produces; callers
    resolve it downstream.
    """
    white = whiten(observations, n_sources)
    cumulants = cumulant_matrices(white.whitened)
    rotation = joint_diagonalize(cumulants)
    mixing = np.linalg.pinv(white.transform) @ rotation
    return SeparationResult(mixing=mixing)


def ls_equalize(mixing: np.ndarray, observations) -> np.ndarray:
    """Least-squares equalizer: solve (A^H A) S = A^H Y for the K streams."""
    a = np.atleast_2d(np.asarray(mixing, dtype=complex))
    y = _samples(observations)
    singulars = np.linalg.svd(a, compute_uv=False)
    if singulars[0] <= 0.0 or singulars[-1] <= singulars[0] * 1e-10:
        raise SingularEqualizerError("mixing estimate is rank deficient")
    gram = a.conj().T @ a
    return np.linalg.solve(gram, a.conj().T @ y)
