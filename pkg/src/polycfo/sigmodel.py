"""Baseband signal model for the oversampled multiuser receiver.

Everything is expressed in normalized units: time in symbol periods,
frequency offsets in cycles per symbol. K users transmit unit-power symbols
through flat channels with per-user complex gain, sub-sample delay and
carrier-frequency offset; sampling P times per symbol stacks the received
signal into a P-branch polyphase vector whose mixing matrix this module
constructs explicitly, so the receiver side can be validated against exact
ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError
from .util import as_rng

#: SNR sentinel for exact, noise-free observations.
NOISELESS = np.inf


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power alphabet, invariant under rotation by 2pi/symmetry_order."""

    name: str
    points: np.ndarray
    symmetry_order: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if pts.size == 0:
            raise InvalidConfigurationError("constellation alphabet is empty")
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return self.points.size

    def nearest(self, values) -> np.ndarray:
        """Indices of the alphabet points closest to ``values`` (elementwise)."""
        v = np.asarray(values, dtype=complex)
        return np.argmin(np.abs(v[..., None] - self.points), axis=-1)


def qam4() -> Constellation:
    """4QAM, points counterclockwise from (1+j)/sqrt(2), four-fold symmetric."""
    pts = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)
    return Constellation("4QAM", pts, symmetry_order=4)


def bpsk() -> Constellation:
    return Constellation("BPSK", np.array([1.0 + 0j, -1.0 + 0j]), symmetry_order=2)


def mpsk(order: int) -> Constellation:
    """M-ary PSK on the unit circle, points ordered by increasing angle."""
    if order < 2:
        raise InvalidConfigurationError("PSK order must be at least 2")
    pts = np.exp(2j * np.pi * np.arange(order) / order)
    return Constellation(f"{order}PSK", pts, symmetry_order=order)


def constellation_by_name(name: str) -> Constellation:
    """Resolve a config-file label ("4QAM", "BPSK", "8PSK", ...)."""
    label = name.strip().upper()
    if label == "4QAM":
        return qam4()
    if label == "BPSK":
        return bpsk()
    if label.endswith("PSK"):
        try:
            return mpsk(int(label[:-3]))
        except ValueError:
            pass
    raise InvalidConfigurationError(f"unknown constellation {name!r}")


@dataclass(frozen=True)
class ChannelRealization:
    """Ground truth for one trial.

    gains        complex fading coefficient per user (includes phase offset)
    delays       path delay per user in symbol periods, each in [0, 1/P)
    cfos         normalized frequency offset per user in cycles/symbol,
                 each in [-1/2, 1/2); the absolute offset for a symbol
                 period T is cfos/T
    oversampling samples per symbol period P, at least the user count
    """

    gains: np.ndarray
    delays: np.ndarray
    cfos: np.ndarray
    oversampling: int

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        delays = np.atleast_1d(np.asarray(self.delays, dtype=float))
        cfos = np.atleast_1d(np.asarray(self.cfos, dtype=float))
        if not (gains.size == delays.size == cfos.size):
            raise InvalidConfigurationError("gains, delays and cfos must have one entry per user")
        p = int(self.oversampling)
        if p < gains.size:
            raise InvalidConfigurationError(
                f"oversampling factor {p} must be at least the user count {gains.size}"
            )
        if np.any(delays < 0) or np.any(delays >= 1.0 / p):
            raise InvalidConfigurationError("delays must lie in [0, 1/P) symbol periods")
        if np.any(cfos < -0.5) or np.any(cfos >= 0.5):
            raise InvalidConfigurationError("normalized CFOs must lie in [-1/2, 1/2)")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "cfos", cfos)
        object.__setattr__(self, "oversampling", p)

    @property
    def n_users(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class SymbolFrame:
    """K x N matrix of transmitted symbols, one row per user."""

    symbols: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "symbols", np.atleast_2d(np.asarray(self.symbols, dtype=complex)))

    @property
    def n_users(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[1]


@dataclass(frozen=True)
class VirtualChannel:
    """P x K mixing matrix tying rotated user symbols to polyphase branches."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.atleast_2d(np.asarray(self.matrix, dtype=complex)))


@dataclass(frozen=True)
class PolyphaseObservations:
    """P x N received samples (one row per polyphase branch) plus the noise level used."""

    samples: np.ndarray
    snr_db: float
    noise_variance: float


def generate_symbols(n_users: int, n_symbols: int, constellation: Constellation, seed) -> SymbolFrame:
    """Draw a K x N frame i.i.d. uniform over the alphabet; deterministic given seed."""
    if n_users < 1 or n_symbols < 1:
        raise InvalidConfigurationError("frame needs at least one user and one symbol")
    rng = as_rng(seed)
    idx = rng.integers(0, constellation.order, size=(n_users, n_symbols))
    return SymbolFrame(constellation.points[idx])


def pulse(t):
    """Hamming window over one symbol period.

    0.54 - 0.46*cos(2*pi*t) for t in [0, 1] (periodic-endpoint form, so the
    edges sit at 0.08 rather than 0), exactly zero outside. Accepts scalars
    or arrays; time is in symbol periods.
    """
    t = np.asarray(t, dtype=float)
    inside = (t >= 0.0) & (t <= 1.0)
    out = np.where(inside, 0.54 - 0.46 * np.cos(2.0 * np.pi * t), 0.0)
    return float(out) if out.ndim == 0 else out


def build_virtual_channel(channel: ChannelRealization) -> VirtualChannel:
    """Evaluate the P x K mixing matrix for one channel realization.

    Branch m (1-based) of user k carries gain * exp(j*2*pi*f_k*m/P) *
    pulse(m/P - delay_k): the modulus is set by the pulse only, while the
    phase advances linearly down the column at 2*pi*f_k/P per branch - the
    structure the frequency-offset fit exploits.
    """
    p = channel.oversampling
    branch = np.arange(1, p + 1, dtype=float)[:, None]
    shape = pulse(branch / p - channel.delays[None, :])
    spin = np.exp(2j * np.pi * channel.cfos[None, :] * branch / p)
    return VirtualChannel(channel.gains[None, :] * spin * shape)


def rotate_symbols(symbols: np.ndarray, cfos: np.ndarray) -> np.ndarray:
    """Apply the per-user symbol-rate rotation exp(j*2*pi*f_k*i), i = 0..N-1."""
    symbols = np.atleast_2d(np.asarray(symbols, dtype=complex))
    i = np.arange(symbols.shape[1])
    return symbols * np.exp(2j * np.pi * np.outer(np.asarray(cfos, dtype=float), i))


def synthesize_observations(
    virtual_channel: VirtualChannel,
    frame: SymbolFrame,
    channel: ChannelRealization,
    snr_db: float,
    seed,
) -> PolyphaseObservations:
    """Mix the rotated symbol frame through the virtual channel and add noise.

    The noise is i.i.d. circular complex Gaussian across all P*N samples;
    its per-sample variance is fixed so that snr_db = 10*log10(mean received
    signal power per sample / noise variance). Pass ``NOISELESS`` for an
    exact, noise-free frame. Deterministic given seed.
    """
    mixing = virtual_channel.matrix
    p, k = mixing.shape
    if k != frame.n_users or k != channel.n_users or p != channel.oversampling:
        raise InvalidConfigurationError("mixing, frame and channel dimensions disagree")
    rotated = rotate_symbols(frame.symbols, channel.cfos)
    # per-user accumulation keeps the summation order reproducible by tests
    clean = np.zeros((p, frame.n_symbols), dtype=complex)
    for j in range(k):
        clean += mixing[:, j, None] * rotated[j]
    if np.isinf(snr_db):
        return PolyphaseObservations(clean, float(snr_db), 0.0)
    if not np.isfinite(snr_db):
        raise InvalidConfigurationError("snr_db must be finite or +inf")
    signal_power = float(np.mean(np.abs(clean) ** 2))
    noise_variance = signal_power * 10.0 ** (-snr_db / 10.0)
    rng = as_rng(seed)
    scale = np.sqrt(noise_variance / 2.0)
    noise = scale * (rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape))
    return PolyphaseObservations(clean + noise, float(snr_db), noise_variance)


def draw_random_channel(n_users: int, oversampling: int, seed) -> ChannelRealization:
    """Draw gains ~ CN(0, 1), delays ~ U[0, 1/P), offsets ~ U[-1/2, 1/2)."""
    if oversampling < n_users:
        raise InvalidConfigurationError(
            f"oversampling factor {oversampling} must be at least the user count {n_users}"
        )
    rng = as_rng(seed)
    gains = (rng.standard_normal(n_users) + 1j * rng.standard_normal(n_users)) / np.sqrt(2.0)
    delays = rng.uniform(0.0, 1.0 / oversampling, size=n_users)
    cfos = rng.uniform(-0.5, 0.5, size=n_users)
    return ChannelRealization(gains, delays, cfos, oversampling)
