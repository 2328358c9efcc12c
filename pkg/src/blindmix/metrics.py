"""Recovery metrics and ground-truth generation."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .signal_chain import draw_channel, draw_gaussian_signal, draw_qam_signal

__all__ = [
    "SUCCESS_THRESHOLD",
    "GroundTruth",
    "aligned_distance",
    "condition_number",
    "draw_ground_truth",
    "incoherence_mu",
    "lift",
    "point_error",
    "relative_error",
    "scale_to_kappa",
]

SUCCESS_THRESHOLD = 1e-3


def lift(X, H):
    """Rank-one matrices ``x_k h_k^T`` (the lifted ``x h-bar^H``), shape (s, N, K)."""
    X = np.atleast_2d(X)
    H = np.atleast_2d(H)
    return X[:, :, None] * H[:, None, :]


@dataclass
class GroundTruth:
    X: np.ndarray  # (s, N) signals
    H: np.ndarray  # (s, K) channels
    messages: list | None = None

    @property
    def s(self):
        return self.X.shape[0]

    @property
    def N(self):
        return self.X.shape[1]

    @property
    def K(self):
        return self.H.shape[1]

    @property
    def lifted(self):
        return lift(self.X, self.H)

    @property
    def point(self):
        return np.concatenate([self.X, np.conj(self.H)], axis=1)

    def component_norms(self):
        return np.linalg.norm(self.X, axis=1) * np.linalg.norm(self.H, axis=1)


def draw_ground_truth(N, K, s, L, signal="gaussian", rng=None, kappa=None):
    """Random signals and channels; with ``kappa`` the factors are balanced
    (``||x_k|| = ||h_k||``) and component norms run geometrically from 1 to kappa.
    """
    rng = np.random.default_rng(rng)
    draw = {"gaussian": draw_gaussian_signal, "qam16": draw_qam_signal}.get(signal)
    if draw is None:
        raise ValueError(f"unknown signal kind {signal!r}")
    sigs = [draw(N, rng) for _ in range(s)]
    X = np.stack([sg.x for sg in sigs])
    H = np.stack([draw_channel(K, L, rng).h for _ in range(s)])
    messages = [sg.message for sg in sigs] if signal == "qam16" else None
    if kappa is not None:
        X, H = scale_to_kappa(X, H, kappa)
    return GroundTruth(X, H, messages)


def scale_to_kappa(X, H, kappa):
    """Balance each pair and set component norms to ``geomspace(1, kappa, s)``."""
    s = X.shape[0]
    targets = np.geomspace(1.0, kappa, s) if s > 1 else np.ones(1)
    X = X / np.linalg.norm(X, axis=1, keepdims=True) * np.sqrt(targets)[:, None]
    H = H / np.linalg.norm(H, axis=1, keepdims=True) * np.sqrt(targets)[:, None]
    return X, H


def relative_error(estimates, truth):
    """``sqrt(sum ||X_k - X_k^true||_F^2) / sqrt(sum ||X_k^true||_F^2)``."""
    estimates = np.asarray(estimates)
    truth = np.asarray(truth)
    if estimates.shape != truth.shape:
        raise ValueError(f"estimate shape {estimates.shape} != truth shape {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ValueError("ground truth has zero norm")
    return float(np.linalg.norm(estimates - truth) / denom)


def point_error(V, truth):
    """:func:`relative_error` of a lifted product point against a :class:`GroundTruth`."""
    V = np.asarray(V)
    N = truth.N
    return relative_error(lift(V[:, :N], np.conj(V[:, N:])), truth.lifted)


def _dist_terms(x, h, x0, h0):
    return (
        np.vdot(x, x).real, np.vdot(x0, x),
        np.vdot(h, h).real, np.vdot(h0, h),
        np.vdot(x0, x0).real + np.vdot(h0, h0).real,
    )


def _dist_objective(psi, xx, x0x, hh, h0h, d0):
    # ||psi x - x0||^2 + ||h / psi - h0||^2 expanded in inner products
    return (np.abs(psi) ** 2 * xx - 2 * np.real(psi * x0x)
            + hh / np.abs(psi) ** 2 - 2 * np.real(h0h / psi) + d0)


def _aligned_pair(x, h, x0, h0, n_phase=720, n_mag=241):
    xx, x0x, hh, h0h, d0 = _dist_terms(x, h, x0, h0)
    theta = np.linspace(0, 2 * np.pi, n_phase, endpoint=False)
    logr = np.linspace(-6, 6, n_mag)
    psi = 10.0 ** logr[:, None] * np.exp(1j * theta[None, :])
    vals = _dist_objective(psi, xx, x0x, hh, h0h, d0)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)

    def obj(p):
        psi = 10.0 ** p[0] * np.exp(1j * p[1])
        return float(np.sum(np.abs(psi * x - x0) ** 2) + np.sum(np.abs(h / psi - h0) ** 2))

    res = minimize(obj, [logr[i], theta[j]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    best = min(float(res.fun), float(vals[i, j]))
    return max(best, 0.0) / d0


def aligned_distance(V, truth):
    """Root of the summed per-user alignment-minimized squared distances.

    Each user minimizes ``(||psi x - x0||^2 + ||h / psi - h0||^2) / d`` over
    nonzero complex ``psi`` with ``d = ||x0||^2 + ||h0||^2``; ``h / psi`` is the
    pairing under which the measurements are invariant.
    """
    V = np.asarray(V)
    N = truth.N
    total = 0.0
    for k in range(truth.s):
        total += _aligned_pair(V[k, :N], np.conj(V[k, N:]), truth.X[k], truth.H[k])
    return float(np.sqrt(total))


def incoherence_mu(h, B):
    """``sqrt(L) max_i |b_i^H h| / ||h||``."""
    h = np.asarray(h)
    B = getattr(B, "B", B)
    nh = np.linalg.norm(h)
    if nh == 0:
        raise ValueError("incoherence of the zero channel is undefined")
    return float(np.sqrt(B.shape[0]) * np.max(np.abs(B @ h)) / nh)


def condition_number(truth):
    norms = truth.component_norms()
    return float(norms.max() / norms.min())
