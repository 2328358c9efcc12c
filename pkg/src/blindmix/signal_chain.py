"""Ground-truth signals, channels and the time-domain OFDM transmit chain.

All DFTs here are unitary (``norm="ortho"``). With that normalization the
convolution theorem reads ``dft(f (*) g) = sqrt(L) * dft(f) * dft(g)``, and the
Fourier-domain observation used by the solvers is ``dft(z) / sqrt(L)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSymbolError, ShapeError

__all__ = [
    "QAM16_LEVELS",
    "QAM16_POINTS",
    "ChannelImpulse",
    "SourceSignal",
    "add_cyclic_prefix",
    "cyclic_convolve",
    "draw_channel",
    "draw_gaussian_signal",
    "draw_qam_message",
    "draw_qam_signal",
    "fourier_observation",
    "lti_channel_output",
    "ofdm_demodulate",
    "ofdm_modulate",
    "qam16_demodulate",
    "qam16_modulate",
    "receive_time_domain",
]

QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])

# index -> LEVELS[index // 4] + 1j * LEVELS[index % 4], unit average energy
QAM16_POINTS = (
    QAM16_LEVELS[np.arange(16) // 4] + 1j * QAM16_LEVELS[np.arange(16) % 4]
) / np.sqrt(10.0)


@dataclass(frozen=True)
class SourceSignal:
    x: np.ndarray
    kind: str = "gaussian"
    message: np.ndarray | None = None


@dataclass(frozen=True)
class ChannelImpulse:
    """Channel taps ``h`` (length K) and their zero-padded form ``g`` (length L)."""

    h: np.ndarray
    L: int

    def __post_init__(self):
        if not len(self.h) < self.L:
            raise ShapeError(f"channel length K={len(self.h)} must be < L={self.L}")

    @property
    def g(self):
        g = np.zeros(self.L, dtype=complex)
        g[: len(self.h)] = self.h
        return g


def _as_message(msg):
    msg = np.asarray(msg)
    if msg.ndim != 1 or msg.size < 1:
        raise InvalidSymbolError("message must be a non-empty 1-D index sequence")
    if not np.issubdtype(msg.dtype, np.integer):
        if not np.all(np.equal(np.mod(msg, 1), 0)):
            raise InvalidSymbolError("symbol indices must be integers")
        msg = msg.astype(int)
    if np.any(msg < 0) or np.any(msg > 15):
        raise InvalidSymbolError(f"symbol indices must lie in [0, 15], got {msg.min()}..{msg.max()}")
    return msg


def qam16_modulate(msg):
    """Map integer indices in ``0..15`` to unit-energy 16-QAM points."""
    return QAM16_POINTS[_as_message(msg)]


def qam16_demodulate(x_hat):
    """Return the nearest-point indices of ``F_N x_hat``.

    Ties go to the smaller index (``argmin`` keeps the first minimum).
    """
    s_hat = ofdm_demodulate(x_hat)
    d = np.abs(s_hat[:, None] - QAM16_POINTS[None, :])
    return np.argmin(d, axis=1)


def ofdm_modulate(s):
    """``x = F_N^H s`` with the unitary N-point DFT."""
    s = np.asarray(s, dtype=complex)
    if s.ndim != 1 or s.size < 1:
        raise ShapeError("symbol vector must be non-empty and 1-D")
    return np.fft.ifft(s, norm="ortho")


def ofdm_demodulate(x):
    """Inverse of :func:`ofdm_modulate`, ``s = F_N x``."""
    return np.fft.fft(np.asarray(x, dtype=complex), norm="ortho")


def add_cyclic_prefix(p, Lp):
    p = np.asarray(p)
    Np = len(p)
    if not 1 <= Lp <= Np:
        raise ValueError(f"prefix length must satisfy 1 <= Lp <= {Np}, got {Lp}")
    return np.concatenate([p[Np - Lp:], p])


def cyclic_convolve(f, g):
    """``out[n] = sum_m f[m] g[(n - m) mod L]``."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape or f.ndim != 1:
        raise ShapeError(f"cyclic convolution needs equal-length vectors, got {f.shape} and {g.shape}")
    return np.fft.ifft(np.fft.fft(f) * np.fft.fft(g))


def lti_channel_output(d, q, prefix_len=None):
    """Windowed linear convolution of a cyclically prefixed block.

    ``d`` is the prefixed block (prefix length ``prefix_len``, default
    ``len(q) - 1``); the returned ``Np`` samples skip the prefix transient and
    coincide with the cyclic convolution of the unprefixed block with ``q``.
    """
    d = np.asarray(d, dtype=complex)
    q = np.asarray(q, dtype=complex)
    Lq = len(q)
    if prefix_len is None:
        prefix_len = Lq - 1
    if prefix_len < Lq - 1:
        raise ValueError(f"prefix of length {prefix_len} is shorter than L'-1 = {Lq - 1}")
    Np = len(d) - prefix_len
    if Np < Lq:
        raise ShapeError("block is shorter than the channel")
    full = np.convolve(d, q)
    return full[prefix_len: prefix_len + Np]


def receive_time_domain(signals, encoders, channels, noise=None):
    """``z = sum_k (C_k x_k) (*) g_k + n`` with time-domain encoders ``C_k``."""
    if not (len(signals) == len(encoders) == len(channels)):
        raise ShapeError("need one encoder and one channel per signal")
    L = None
    z = None
    for sig, C, ch in zip(signals, encoders, channels):
        x = sig.x if isinstance(sig, SourceSignal) else np.asarray(sig)
        g = ch.g if isinstance(ch, ChannelImpulse) else np.asarray(ch)
        C = np.asarray(C)
        if C.shape[1] != len(x) or C.shape[0] != len(g):
            raise ShapeError(f"encoder {C.shape} incompatible with x ({len(x)}) and g ({len(g)})")
        if L is None:
            L = len(g)
            z = np.zeros(L, dtype=complex)
        elif len(g) != L:
            raise ShapeError("all channels must share the block length L")
        z = z + cyclic_convolve(C @ x, g)
    if noise is not None:
        noise = np.asarray(noise)
        if noise.shape != z.shape:
            raise ShapeError(f"noise shape {noise.shape} != {z.shape}")
        z = z + noise
    return z


def fourier_observation(z):
    """Map a received block to the Fourier-domain model, ``F_L z / sqrt(L)``."""
    z = np.asarray(z, dtype=complex)
    return np.fft.fft(z, norm="ortho") / np.sqrt(len(z))


def _cn(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def draw_qam_message(N, rng):
    return rng.integers(0, 16, size=N)


def draw_qam_signal(N, rng):
    msg = draw_qam_message(N, rng)
    return SourceSignal(x=ofdm_modulate(qam16_modulate(msg)), kind="qam16", message=msg)


def draw_gaussian_signal(N, rng):
    return SourceSignal(x=_cn(rng, N), kind="gaussian")


def draw_channel(K, L, rng):
    return ChannelImpulse(h=_cn(rng, K), L=L)
