"""Encoding matrices, the rank-one sensing ensemble and observation synthesis.

Conventions
-----------
``fourier[k]`` is the L x N matrix ``F C_k`` whose i-th row is ``c_ki^H``;
``B`` is the L x K partial DFT whose i-th row is ``b_i^H``. Measurements are
never formed as matrices; user ``k`` contributes

    y_i = (c_ki^H x_k) (b_i^H h_k) = <A_ki, x_k h_k^T>,   A_ki = c_ki conj(b_i)^H

and the lifted factor ``w = [x; conj(h)]`` reproduces the same value through
the block operator ``J_ki``.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ShapeError, UnsupportedSizeError

__all__ = [
    "ChannelSubspace",
    "EncodingMatrix",
    "MeasurementEnsemble",
    "ObservationVector",
    "build_ensemble",
    "build_gaussian_encoding",
    "build_hadamard_encoding",
    "build_partial_dft",
    "hadamard_matrix",
    "is_hadamard_size",
    "synthesize_observation",
    "user_seeds",
]


def _paley12():
    q = 11
    residues = {(i * i) % q for i in range(1, q)}
    chi = np.array([0] + [1 if a in residues else -1 for a in range(1, q)])
    Q = chi[(np.arange(q)[None, :] - np.arange(q)[:, None]) % q]
    S = np.zeros((q + 1, q + 1), dtype=int)
    S[0, 1:] = 1
    S[1:, 0] = -1
    S[1:, 1:] = Q
    return np.eye(q + 1, dtype=int) + S


def hadamard_matrix(L):
    """Real +-1 Hadamard matrix of order ``2**a`` or ``12 * 2**a``."""
    L = int(L)
    if L >= 1 and L & (L - 1) == 0:
        return scipy.linalg.hadamard(L)
    if L >= 12 and L % 12 == 0 and is_hadamard_size(L):
        return np.kron(_paley12(), scipy.linalg.hadamard(L // 12))
    raise UnsupportedSizeError(f"no Hadamard construction for L={L}; need 2^a or 12*2^a")


def is_hadamard_size(L):
    L = int(L)
    m = L // 12 if L % 12 == 0 else L
    return L >= 1 and m & (m - 1) == 0


@dataclass(frozen=True)
class EncodingMatrix:
    kind: str
    fourier: np.ndarray
    seed: int

    @property
    def L(self):
        return self.fourier.shape[0]

    @property
    def N(self):
        return self.fourier.shape[1]

    @property
    def time_domain(self):
        """Time-domain encoder ``C_k`` such that ``F C_k`` equals :attr:`fourier`."""
        return np.fft.ifft(self.fourier, axis=0, norm="ortho")


def build_gaussian_encoding(L, N, seed):
    if not L > N >= 1:
        raise ShapeError(f"need L > N >= 1, got L={L}, N={N}")
    rng = np.random.default_rng(seed)
    fc = (rng.standard_normal((L, N)) + 1j * rng.standard_normal((L, N))) / np.sqrt(2.0)
    return EncodingMatrix("gaussian", fc, int(seed))


def build_hadamard_encoding(L, N, seed):
    """``C_k = F D_k H`` with random signs ``D_k`` and N Hadamard columns ``H``."""
    if not L > N >= 1:
        raise ShapeError(f"need L > N >= 1, got L={L}, N={N}")
    H = hadamard_matrix(L)[:, :N].astype(float)
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=L)
    C = np.fft.fft(signs[:, None] * H, axis=0, norm="ortho")
    fc = np.fft.fft(C, axis=0, norm="ortho")
    return EncodingMatrix("hadamard", fc, int(seed))


@dataclass(frozen=True)
class ChannelSubspace:
    B: np.ndarray

    @property
    def L(self):
        return self.B.shape[0]

    @property
    def K(self):
        return self.B.shape[1]


def build_partial_dft(L, K):
    if not 1 <= K < L:
        raise ShapeError(f"need 1 <= K < L, got K={K}, L={L}")
    i = np.arange(L)[:, None]
    j = np.arange(K)[None, :]
    return ChannelSubspace(np.exp(-2j * np.pi * i * j / L) / np.sqrt(L))


def user_seeds(base_seed, s, role=0):
    """Independent integer seeds for ``s`` users, keyed by ``(role, k)``."""
    return [
        int(np.random.SeedSequence(base_seed, spawn_key=(role, k)).generate_state(1)[0])
        for k in range(s)
    ]


class MeasurementEnsemble:
    """The s-user collection of implicit sensing matrices ``A_ki`` / ``J_ki``."""

    def __init__(self, encoders, subspace):
        if not encoders:
            raise ShapeError("ensemble needs at least one user")
        L, N = encoders[0].L, encoders[0].N
        for enc in encoders:
            if (enc.L, enc.N) != (L, N):
                raise ShapeError("all encoders must share (L, N)")
        if subspace.L != L:
            raise ShapeError(f"subspace has L={subspace.L}, encoders have L={L}")
        self.encoders = list(encoders)
        self.subspace = subspace
        self.kind = encoders[0].kind
        self.fc = np.stack([enc.fourier for enc in encoders])
        self.fc_h = np.ascontiguousarray(np.conj(self.fc).transpose(0, 2, 1))
        self.B = subspace.B
        self.L, self.N, self.K, self.s = L, N, subspace.K, len(encoders)

    @property
    def n(self):
        return self.N + self.K

    def _check_user(self, k):
        if not 0 <= k < self.s:
            raise ShapeError(f"user index {k} out of range for s={self.s}")

    def forward_A(self, k, x, h):
        self._check_user(k)
        x = np.asarray(x)
        h = np.asarray(h)
        if x.shape != (self.N,) or h.shape != (self.K,):
            raise ShapeError(f"expected x in C^{self.N}, h in C^{self.K}, got {x.shape}, {h.shape}")
        return (self.fc[k] @ x) * (self.B @ h)

    def adjoint_A(self, k, z):
        """``sum_i z_i b_i c_ki^T`` as a K x N matrix.

        This is the adjoint of ``X -> {<A_ki, X>}`` (transposed to K x N); for
        real encoder rows it coincides with ``sum_i z_i b_i c_ki^H``.
        """
        self._check_user(k)
        z = np.asarray(z)
        if z.shape != (self.L,):
            raise ShapeError(f"expected z in C^{self.L}, got {z.shape}")
        return (np.conj(self.B).T * z) @ np.conj(self.fc[k])

    def apply_A_matrix(self, k, Z):
        """``{<A_ki, Z>}_i`` for a general N x K matrix ``Z``."""
        self._check_user(k)
        return np.sum((self.fc[k] @ Z) * self.B, axis=1)

    def forward_J(self, k, w):
        self._check_user(k)
        w = np.asarray(w)
        if w.shape != (self.n,):
            raise ShapeError(f"expected w in C^{self.n}, got {w.shape}")
        return (self.fc[k] @ w[: self.N]) * (self.B @ np.conj(w[self.N:]))

    def forward_all(self, X, H):
        """Per-user measurements for stacked factors ``X`` (s, N) and ``H`` (s, K)."""
        cx = np.matmul(self.fc, X[:, :, None])[:, :, 0]
        bh = H @ self.B.T
        return cx * bh

    def header(self):
        return {
            "kind": self.kind,
            "L": self.L,
            "N": self.N,
            "K": self.K,
            "s": self.s,
            "seeds": [enc.seed for enc in self.encoders],
        }

    def dumps(self):
        return json.dumps(self.header(), sort_keys=True)

    @classmethod
    def from_header(cls, header):
        if isinstance(header, str):
            header = json.loads(header)
        builder = {"gaussian": build_gaussian_encoding, "hadamard": build_hadamard_encoding}[header["kind"]]
        if len(header["seeds"]) != header["s"]:
            raise ShapeError("header lists a different number of seeds than users")
        encoders = [builder(header["L"], header["N"], sd) for sd in header["seeds"]]
        return cls(encoders, build_partial_dft(header["L"], header["K"]))


def build_ensemble(kind, L, N, K, s, seed):
    builder = {"gaussian": build_gaussian_encoding, "hadamard": build_hadamard_encoding}.get(kind)
    if builder is None:
        raise ValueError(f"unknown encoder kind {kind!r}")
    encoders = [builder(L, N, sd) for sd in user_seeds(seed, s, role=1)]
    return MeasurementEnsemble(encoders, build_partial_dft(L, K))


@dataclass
class ObservationVector:
    y: np.ndarray
    sigma: float = 0.0
    ground_truth: tuple | None = field(default=None, repr=False)
    noise: np.ndarray | None = field(default=None, repr=False)


def synthesize_observation(ensemble, xs, hs, sigma=0.0, noise_seed=None):
    """``y = sum_k A_k(x_k h_k^T) + e`` with ``||e|| = sigma ||y_clean||``."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    X = np.asarray(xs, dtype=complex).reshape(ensemble.s, ensemble.N)
    H = np.asarray(hs, dtype=complex).reshape(ensemble.s, ensemble.K)
    y_clean = ensemble.forward_all(X, H).sum(axis=0)
    e = np.zeros_like(y_clean)
    if sigma > 0:
        rng = np.random.default_rng(noise_seed)
        omega = (rng.standard_normal(ensemble.L) + 1j * rng.standard_normal(ensemble.L)) / np.sqrt(2.0)
        e = sigma * np.linalg.norm(y_clean) * omega / np.linalg.norm(omega)
    return ObservationVector(y=y_clean + e, sigma=float(sigma), ground_truth=(X, H), noise=e)
