"""Ambiguity-aware scoring of recovered frames.

Any blind separation leaves a stream permutation and a per-stream rotation
from the constellation's symmetry group unresolved; these are declared
trivial and removed before counting errors. Alignment is exhaustive over
permutations x rotations (user counts up to four), scoring symbol
mismatches; frequency estimates are matched with the same permutation as
the streams they came from.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfigurationError, UnsupportedScaleError
from .sigmodel import Constellation, SymbolFrame
from .util import wrap_offset_error

MAX_USERS_EXHAUSTIVE = 4


class Alignment(NamedTuple):
    """Best trivial-ambiguity resolution: stream-for-user permutation,
    per-user rotation indices, and the decisions after applying both."""

    permutation: tuple
    rotations: tuple
    decisions: np.ndarray


def symbol_indices(symbols, constellation: Constellation) -> np.ndarray:
    """Map exact constellation symbols back to their alphabet indices."""
    frame = symbols.symbols if isinstance(symbols, SymbolFrame) else np.asarray(symbols)
    return constellation.nearest(frame)


def rotation_table(constellation: Constellation) -> np.ndarray:
    """Index remap for each symmetry rotation: table[r, i] is the index of
    points[i] rotated by 2*pi*r/symmetry_order."""
    order = constellation.symmetry_order
    table = np.empty((order, constellation.order), dtype=int)
    for r in range(order):
        rotated = constellation.points * np.exp(2j * np.pi * r / order)
        table[r] = constellation.nearest(rotated)
    return table


def gray_bit_table(constellation: Constellation) -> np.ndarray:
    """Bits per alphabet index under binary-reflected Gray coding.

    Points are ordered by angle, so Gray coding the index makes angularly
    adjacent points differ in exactly one bit; for 4QAM this is the usual
    (00, 01, 11, 10) counterclockwise labeling from (1+j)/sqrt(2).
    """
    order = constellation.order
    n_bits = order.bit_length() - 1
    if 2**n_bits != order:
        raise InvalidConfigurationError("bit mapping needs a power-of-two alphabet")
    table = np.empty((order, n_bits), dtype=np.uint8)
    for i in range(order):
        code = i ^ (i >> 1)
        for b in range(n_bits):
            table[i, n_bits - 1 - b] = (code >> b) & 1
    return table


def resolve_ambiguity(decisions: np.ndarray, truth, constellation: Constellation) -> Alignment:
    """Search permutations and symmetry rotations for the fewest symbol errors.

    Ties break to the lexicographically smallest (permutation, rotation)
    pair. The returned decisions are in user order with rotations applied,
    directly comparable against the true frame.
    """
    decided = np.atleast_2d(np.asarray(decisions, dtype=int))
    true_idx = symbol_indices(truth, constellation)
    if decided.shape != true_idx.shape:
        raise InvalidConfigurationError("decision and truth shapes disagree")
    k = decided.shape[0]
    if k > MAX_USERS_EXHAUSTIVE:
        raise UnsupportedScaleError(
            f"exhaustive alignment supports at most {MAX_USERS_EXHAUSTIVE} users, got {k}"
        )
    table = rotation_table(constellation)
    n_rot = table.shape[0]
    # errors[r, j, k]: mismatches of stream j against user k under rotation r
    rotated = table[:, decided]  # n_rot x K x N
    errors = (rotated[:, :, None, :] != true_idx[None, None, :, :]).sum(axis=-1)
    best = None
    for perm in itertools.permutations(range(k)):
        rotations = []
        total = 0
        for user in range(k):
            per_rot = errors[:, perm[user], user]
            r = int(np.argmin(per_rot))
            rotations.append(r)
            total += int(per_rot[r])
        if best is None or total < best[0]:
            best = (total, perm, tuple(rotations))
    _, perm, rotations = best
    aligned = np.vstack([table[rotations[u], decided[perm[u]]] for u in range(k)])
    return Alignment(permutation=perm, rotations=rotations, decisions=aligned)


def mse_cfo(estimates, true_offsets, permutation) -> float:
    """Mean squared frequency-offset error after stream/user matching.

    Differences are wrapped into (-1/2, 1/2] before squaring: normalized
    offsets are only identifiable modulo one cycle per symbol.
    """
    est = np.asarray(getattr(estimates, "offsets", estimates), dtype=float)
    true = np.asarray(true_offsets, dtype=float)
    perm = np.asarray(permutation, dtype=int)
    diff = wrap_offset_error(est[perm] - true)
    return float(np.mean(diff**2))


def bit_errors(aligned_decisions: np.ndarray, truth_indices: np.ndarray, constellation: Constellation) -> tuple[int, int]:
    """Count (errors, total) bits between aligned decisions and the truth."""
    table = gray_bit_table(constellation)
    mism = table[np.asarray(aligned_decisions, dtype=int)] != table[np.asarray(truth_indices, dtype=int)]
    return int(mism.sum()), int(mism.size)


def ber(aligned_decisions: np.ndarray, truth, constellation: Constellation) -> float:
    """Bit error rate under the constellation's Gray mapping."""
    truth_idx = (
        np.asarray(truth, dtype=int)
        if np.issubdtype(np.asarray(truth).dtype, np.integer)
        else symbol_indices(truth, constellation)
    )
    errors, total = bit_errors(aligned_decisions, truth_idx, constellation)
    return errors / total


def isr_db(mixing_estimate: np.ndarray, mixing_true: np.ndarray) -> float:
    """Interference-to-signal ratio of a separation, in dB.

    Rows of pinv(estimate) @ truth would be scaled unit vectors for a
    perfect separation; after the best row/column matching, the mean
    off-target-to-target power ratio measures the residual crosstalk.
    """
    gain = np.linalg.pinv(np.asarray(mixing_estimate, dtype=complex)) @ np.asarray(
        mixing_true, dtype=complex
    )
    k = gain.shape[0]
    if k > MAX_USERS_EXHAUSTIVE:
        raise UnsupportedScaleError("exhaustive matching supports at most four streams")
    power = np.abs(gain) ** 2
    best = None
    for perm in itertools.permutations(range(k)):
        on_target = sum(power[j, perm[j]] for j in range(k))
        if best is None or on_target > best[0]:
            best = (on_target, perm)
    _, perm = best
    ratios = []
    for j in range(k):
        target = power[j, perm[j]]
        off = power[j].sum() - target
        ratios.append(np.inf if target == 0.0 else off / target)
    return float(10.0 * np.log10(np.mean(ratios))) if np.all(np.isfinite(ratios)) else np.inf
