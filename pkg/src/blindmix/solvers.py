"""Spectral initialization, Riemannian gradient descent, Riemannian trust
regions with truncated CG, and the fast iterative hard thresholding baseline.

Riemannian solvers work on ``(s, N + K)`` arrays of lifted factors
``w_k = [x_k; conj(h_k)]`` through a :class:`~blindmix.cost.CostContext`.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePointError, InitializationError, ModelDecreaseError, StalledStepError
from .manifold import horizontal_project, product_metric, retract

__all__ = [
    "IterateTrace",
    "RgdConfig",
    "TcgParams",
    "TraceRow",
    "TrustRegionConfig",
    "factors_to_point",
    "fiht_run",
    "point_to_factors",
    "rgd_run",
    "rtr_run",
    "spectral_init",
    "tangent_project",
    "tcg_solve",
    "truncated_cg",
    "update_radius",
]


@dataclass
class RgdConfig:
    alpha: float | None = None  # None -> 2/s
    max_iters: int = 500
    grad_tol: float = 1e-8

    def __post_init__(self):
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("step size must be positive")


@dataclass
class TcgParams:
    kappa: float = 0.1
    theta: float = 1.0
    max_inner: int | None = None  # None -> dimension of the horizontal space


@dataclass
class TrustRegionConfig:
    delta0: float = 2.0
    delta_max: float = 64.0
    rho_accept: float = 0.1
    rho_low: float = 0.25
    rho_high: float = 0.75
    shrink: float = 0.25
    expand: float = 2.0
    max_iters: int = 500
    grad_tol: float = 1e-8
    tcg: TcgParams = field(default_factory=TcgParams)

    def __post_init__(self):
        if not 0 < self.rho_accept <= self.rho_low < self.rho_high < 1:
            raise ValueError("need 0 < rho_accept <= rho_low < rho_high < 1")
        if not 0 < self.delta0 <= self.delta_max:
            raise ValueError("need 0 < delta0 <= delta_max")


@dataclass
class TraceRow:
    iter: int
    f: float
    grad_norm: float
    err: float
    time_ms: float


@dataclass
class IterateTrace:
    rows: list = field(default_factory=list)
    stop_reason: str = ""

    def record(self, it, f, grad_norm, err, t0):
        self.rows.append(TraceRow(int(it), float(f), float(grad_norm), float(err),
                                  1e3 * (time.perf_counter() - t0)))

    @property
    def iterations(self):
        return self.rows[-1].iter if self.rows else 0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def __len__(self):
        return len(self.rows)


def factors_to_point(X, H):
    """Stack per-user factors into lifted vectors ``[x_k; conj(h_k)]``."""
    return np.concatenate([np.asarray(X), np.conj(H)], axis=-1)


def point_to_factors(V, N):
    V = np.asarray(V)
    return V[..., :N], np.conj(V[..., N:])


def _spectral_triples(ensemble, y):
    out = []
    for k in range(ensemble.s):
        M = ensemble.adjoint_A(k, y)  # K x N, approximately h_k x_k^T
        U, S, Vh = np.linalg.svd(M)
        if not S[0] > 0:
            raise InitializationError(f"spectral matrix of user {k} vanishes")
        out.append((S[0], Vh[0], U[:, 0]))
    return out


def spectral_init(ensemble, y):
    """Lifted factors from the top singular triple of each ``A_k^*(y)``.

    ``A_k^*(y) ~ h_k x_k^T``, so the right singular vector estimates ``x_k`` and
    the left one ``h_k``; both are scaled by the square root of ``sigma_1``.
    """
    y = np.asarray(y)
    if not np.any(y):
        raise InitializationError("observation is identically zero")
    V = np.empty((ensemble.s, ensemble.n), dtype=complex)
    for k, (sig, x_dir, h_dir) in enumerate(_spectral_triples(ensemble, y)):
        V[k] = factors_to_point(np.sqrt(sig) * x_dir, np.sqrt(sig) * h_dir)
    return V


def _metric_norms(V):
    return 2.0 * np.sum(np.abs(V) ** 2, axis=1)


def rgd_run(context, V0, config=None, error_fn=None):
    """Riemannian gradient descent, ``w_k <- w_k - alpha grad_k / g(w_k, w_k)``.

    All factors move simultaneously. The default ``alpha = 2/s`` equals a step
    of ``1/s`` in the equivalent form ``w - alpha/(2||w||^2) * egrad``. Returns the final point and the trace;
    the trace's ``stop_reason`` is ``"converged"`` or ``"max_iters"``.
    """
    config = config or RgdConfig()
    alpha = config.alpha if config.alpha is not None else 2.0 / context.s
    V = np.array(V0, dtype=complex)
    trace = IterateTrace()
    t0 = time.perf_counter()
    for it in range(config.max_iters + 1):
        f = context.objective(V)
        grad = context.riemannian_gradient(V, check=False)
        gnorm = np.sqrt(product_metric(V, grad, grad))
        trace.record(it, f, gnorm, error_fn(V) if error_fn else np.nan, t0)
        if gnorm < config.grad_tol:
            trace.stop_reason = "converged"
            break
        if it == config.max_iters:
            trace.stop_reason = "max_iters"
            break
        V = retract(V, -alpha * grad / _metric_norms(V)[:, None])
    return V, trace


def truncated_cg(grad, hess, delta, params=None, inner=None, project=None):
    """Steihaug-Toint truncated CG for ``min g(eta, grad) + g(eta, H eta) / 2``
    subject to ``g(eta, eta) <= delta**2``.

    ``hess`` maps a direction to its Hessian image; ``inner`` is the metric
    (default ``2 Re <a, b>``); ``project`` is re-applied to residuals to keep
    them in the working subspace. Returns ``(eta, H eta, stop_reason, n_inner)``.
    """
    params = params or TcgParams()
    if inner is None:
        def inner(a, b):
            return 2.0 * float(np.real(np.vdot(a, b)))
    if project is None:
        def project(v):
            return v

    eta = np.zeros_like(grad)
    Heta = np.zeros_like(grad)
    r = grad
    rr = inner(r, r)
    r0 = np.sqrt(rr)
    if r0 == 0:
        return eta, Heta, "converged", 0
    max_inner = params.max_inner or 2 * grad.size
    delta2 = delta * delta
    d = -r
    e_e = 0.0
    e_d = 0.0
    d_d = rr
    model = 0.0
    for j in range(1, max_inner + 1):
        Hd = hess(d)
        dHd = inner(d, Hd)
        alpha = rr / dHd if dHd != 0 else np.inf
        e_e_new = e_e + 2.0 * alpha * e_d + alpha * alpha * d_d
        if dHd <= 0 or e_e_new >= delta2:
            tau = (-e_d + np.sqrt(e_d * e_d + d_d * (delta2 - e_e))) / d_d
            eta = eta + tau * d
            Heta = Heta + tau * Hd
            reason = "negative_curvature" if dHd <= 0 else "exceeded_trust_region"
            return eta, Heta, reason, j
        eta_new = eta + alpha * d
        Heta_new = Heta + alpha * Hd
        model_new = inner(eta_new, grad) + 0.5 * inner(eta_new, Heta_new)
        if model_new >= model:
            return eta, Heta, "model_increased", j
        eta, Heta, e_e, model = eta_new, Heta_new, e_e_new, model_new
        r = project(r + alpha * Hd)
        rr_new = inner(r, r)
        if np.sqrt(rr_new) <= r0 * min(r0 ** params.theta, params.kappa):
            return eta, Heta, "converged", j
        beta = rr_new / rr
        rr = rr_new
        d = -r + beta * d
        e_d = inner(eta, d)
        d_d = inner(d, d)
    return eta, Heta, "max_inner", max_inner


def tcg_solve(context, V, delta, params=None):
    """Trust-region subproblem on the product horizontal space at ``V``."""
    V = np.asarray(V)
    grad = context.riemannian_gradient(V, check=False)
    params = params or TcgParams()
    if params.max_inner is None:
        params = TcgParams(params.kappa, params.theta, V.shape[0] * (2 * V.shape[1] - 1))
    eta, Heta, reason, _ = truncated_cg(
        grad,
        lambda d: context.riemannian_hessian_vec(V, d, check=False),
        delta,
        params,
        inner=lambda a, b: product_metric(V, a, b),
        project=lambda v: horizontal_project(V, v),
    )
    return eta, reason


def update_radius(rho, delta, hit_boundary, config):
    """Trust-region radius rule; returns ``(new_delta, accept)``."""
    if rho < config.rho_low:
        delta = config.shrink * delta
    elif rho > config.rho_high and hit_boundary:
        delta = min(config.expand * delta, config.delta_max)
    return delta, rho > config.rho_accept


def rtr_run(context, V0, config=None, error_fn=None):
    """Riemannian trust regions with one joint step on the product manifold."""
    config = config or TrustRegionConfig()
    V = np.array(V0, dtype=complex)
    s, n = V.shape
    tcg = config.tcg
    if tcg.max_inner is None:
        tcg = TcgParams(tcg.kappa, tcg.theta, s * (2 * n - 1))
    delta = config.delta0
    trace = IterateTrace()
    t0 = time.perf_counter()
    for it in range(config.max_iters + 1):
        f = context.objective(V)
        grad = context.riemannian_gradient(V, check=False)
        gnorm = np.sqrt(product_metric(V, grad, grad))
        trace.record(it, f, gnorm, error_fn(V) if error_fn else np.nan, t0)
        if gnorm < config.grad_tol:
            trace.stop_reason = "converged"
            break
        if it == config.max_iters:
            trace.stop_reason = "max_iters"
            break
        eta, Heta, reason, _ = truncated_cg(
            grad,
            lambda d: context.riemannian_hessian_vec(V, d, check=False),
            delta,
            tcg,
            inner=lambda a, b: product_metric(V, a, b),
            project=lambda v: horizontal_project(V, v),
        )
        model_decrease = -(product_metric(V, eta, grad) + 0.5 * product_metric(V, eta, Heta))
        if not model_decrease > 0:
            raise ModelDecreaseError(f"tCG returned a step with model decrease {model_decrease:g}")
        rho = context.decrease(V, eta) / model_decrease
        hit_boundary = reason in ("negative_curvature", "exceeded_trust_region")
        delta, accept = update_radius(rho, delta, hit_boundary, config)
        if accept:
            V = retract(V, eta)
    return V, trace


def tangent_project(u, v, Z):
    """Projection onto the tangent space of rank-one matrices at ``u v^H``."""
    uZ = np.conj(u) @ Z
    Zv = Z @ v
    return np.outer(u, uZ) + np.outer(Zv, np.conj(v)) - np.outer(u, np.conj(v)) * (uZ @ v)


def fiht_run(ensemble, y, max_iters=500, tol=1e-8, error_fn=None, init=None):
    """Fast iterative hard thresholding on the s rank-one N x K matrices.

    Users are swept in order and the residual is refreshed after each
    per-user update. Returns the stack of estimates ``(s, N, K)`` and a trace
    whose ``grad_norm`` column holds the norm of the projected gradients.
    """
    y = np.asarray(y, dtype=complex)
    s = ensemble.s
    if init is None:
        # W_k = sig * x_dir h_dir^T = sig * u v^H with u = x_dir, v = conj(h_dir)
        factors = [(sig, x_dir, np.conj(h_dir)) for sig, x_dir, h_dir in _spectral_triples(ensemble, y)]
    else:
        factors = []
        for W in init:
            U, S, Vh = np.linalg.svd(W)
            factors.append((S[0], U[:, 0], np.conj(Vh[0])))

    def measure(k, sig, u, v):
        return sig * ensemble.forward_A(k, u, np.conj(v))

    def stack():
        return np.stack([sig * np.outer(u, np.conj(v)) for sig, u, v in factors])

    parts = [measure(k, *factors[k]) for k in range(s)]
    ynorm = np.linalg.norm(y)
    trace = IterateTrace()
    t0 = time.perf_counter()
    pt_norm = np.nan
    for it in range(max_iters + 1):
        r = y - np.sum(parts, axis=0)
        rel = np.linalg.norm(r) / ynorm if ynorm > 0 else 0.0
        trace.record(it, np.real(np.vdot(r, r)), pt_norm, error_fn(stack()) if error_fn else np.nan, t0)
        if rel < tol:
            trace.stop_reason = "converged"
            break
        if it == max_iters:
            trace.stop_reason = "max_iters"
            break
        sq = 0.0
        for k in range(s):
            sig, u, v = factors[k]
            r = y - np.sum(parts, axis=0)
            G = ensemble.adjoint_A(k, r).T
            P = tangent_project(u, v, G)
            num = np.real(np.vdot(P, P))
            AP = ensemble.apply_A_matrix(k, P)
            den = np.real(np.vdot(AP, AP))
            if den == 0:
                if num != 0:
                    raise StalledStepError(f"user {k}: A_k(P_T(G_k)) vanishes")
                continue
            sq += num
            Wn = sig * np.outer(u, np.conj(v)) + (num / den) * P
            U, S, Vh = np.linalg.svd(Wn)
            if not S[0] > 0:
                raise DegeneratePointError(f"user {k}: rank-one estimate vanished")
            factors[k] = (S[0], U[:, 0], np.conj(Vh[0]))
            parts[k] = measure(k, *factors[k])
        pt_norm = np.sqrt(sq)
    return stack(), trace
