"""Runtime oracle and invariant checks behind ``blindmix selftest``.

Each check builds small random instances and compares the fast factored
implementation against dense constructions, finite differences or exact
identities. ``run_selftest`` returns ``(name, passed, detail)`` tuples.
"""

import numpy as np

from .cost import CostContext
from .experiments import ExperimentConfig, run_trial
from .manifold import horizontal_coefficient, horizontal_project, is_horizontal, metric, random_horizontal
from .measurement import build_ensemble, synthesize_observation
from .metrics import draw_ground_truth
from .signal_chain import ChannelImpulse, fourier_observation, receive_time_domain
from .solvers import tangent_project

__all__ = ["run_selftest", "CHECKS"]


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _problem(rng, N, K, s, L=None, kind="gaussian"):
    L = L or 4 * (N + K)
    ens = build_ensemble(kind, L, N, K, s, int(rng.integers(2**31)))
    truth = draw_ground_truth(N, K, s, L, "gaussian", rng)
    y = synthesize_observation(ens, truth.X, truth.H).y
    return ens, truth, CostContext(ens, y)


def check_geometry(rng, n_instances=100):
    worst = 0.0
    for _ in range(n_instances):
        N, K, s = rng.integers(1, 9), rng.integers(1, 9), rng.integers(1, 4)
        V = _cn(rng, s, N + K)
        eta = _cn(rng, s, N + K)
        P = horizontal_project(V, eta)
        worst = max(worst, np.abs(horizontal_project(V, P) - P).max())
        a = horizontal_coefficient(V, eta)
        worst = max(worst, np.abs(a.real).max())
        for k in range(s):
            worst = max(worst, abs(metric(V[k], P[k], 1j * V[k])))
        if not is_horizontal(V, P):
            return False, "projection is not horizontal"
        ens, _, ctx = _problem(rng, N, K, s, L=2 * (N + K))
        V = _cn(rng, s, N + K)
        f0 = ctx.objective(V)
        f1 = ctx.objective(V * np.exp(1j * rng.uniform(0, 2 * np.pi, (s, 1))))
        worst = max(worst, abs(f1 - f0) / max(f0, 1.0))
    return worst < 1e-10, f"max violation {worst:.2e}"


def check_derivatives(rng, n_dirs=20):
    _, _, ctx = _problem(rng, 6, 5, 2)
    V = _cn(rng, 2, 11)
    g = ctx.riemannian_gradient(V)
    worst_g = worst_h = worst_sa = 0.0
    t = 1e-5
    for j in range(n_dirs):
        eta = random_horizontal(V, rng)
        fd = (ctx.objective(V + t * eta) - ctx.objective(V - t * eta)) / (2 * t)
        worst_g = max(worst_g, abs(fd - metric(V, g, eta)) / max(abs(fd), 1e-12))
        fd_h = (ctx.euclidean_gradient(V + t * eta) - ctx.euclidean_gradient(V - t * eta)) / (2 * t)
        hv = ctx.euclidean_hessian_vec(V, eta)
        worst_h = max(worst_h, np.linalg.norm(fd_h - hv) / np.linalg.norm(hv))
        zeta = random_horizontal(V, rng)
        a = metric(V, ctx.riemannian_hessian_vec(V, eta), zeta)
        b = metric(V, eta, ctx.riemannian_hessian_vec(V, zeta))
        worst_sa = max(worst_sa, abs(a - b) / max(abs(a), 1.0))
    ok = worst_g < 1e-5 and worst_h < 1e-4 and worst_sa < 1e-8
    return ok, f"grad {worst_g:.1e}, hess {worst_h:.1e}, self-adjoint {worst_sa:.1e}"


def check_dense_operators(rng):
    N, K, s, L = 4, 3, 2, 16
    ens, truth, ctx = _problem(rng, N, K, s, L=L)
    worst = 0.0
    for k in range(s):
        x, h = _cn(rng, N), _cn(rng, K)
        dense = np.array([np.sum(np.outer(ens.fc[k][i], ens.B[i]) * np.outer(x, h)) for i in range(L)])
        worst = max(worst, np.abs(dense - ens.forward_A(k, x, h)).max())
        w = np.concatenate([x, np.conj(h)])
        M = np.outer(w, np.conj(w))
        dense_j = np.array([np.sum(np.outer(ens.fc[k][i], ens.B[i]) * M[:N, N:]) for i in range(L)])
        worst = max(worst, np.abs(dense_j - ens.forward_J(k, w)).max())
        z = _cn(rng, L)
        lhs = np.vdot(z, ens.forward_A(k, x, h))
        rhs = np.vdot(ens.adjoint_A(k, z), np.outer(h, x))
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-11, f"max deviation {worst:.2e}"


def check_dual_path(rng):
    N, K, s, L = 8, 6, 3, 64
    ens, truth, _ = _problem(rng, N, K, s, L=L)
    z = receive_time_domain(list(truth.X), [e.time_domain for e in ens.encoders],
                            [ChannelImpulse(h, L) for h in truth.H])
    y_time = fourier_observation(z)
    y_meas = synthesize_observation(ens, truth.X, truth.H).y
    rel = np.linalg.norm(y_time - y_meas) / np.linalg.norm(y_meas)
    return rel < 1e-10, f"relative difference {rel:.2e}"


def check_tangent_projector(rng):
    N, K = 7, 5
    u = _cn(rng, N)
    v = _cn(rng, K)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    Z1, Z2 = _cn(rng, N, K), _cn(rng, N, K)
    P1 = tangent_project(u, v, Z1)
    idem = np.abs(tangent_project(u, v, P1) - P1).max()
    sa = abs(np.vdot(Z2, P1) - np.vdot(tangent_project(u, v, Z2), Z1))
    return max(idem, sa) < 1e-12, f"idempotence {idem:.1e}, self-adjoint {sa:.1e}"


def check_small_recovery(rng):
    cfg = ExperimentConfig(N=10, K=10, L=400, s=1, solvers=("rgd", "rtr", "fiht"),
                           seed=int(rng.integers(2**31)))
    recs = run_trial(cfg, 0, 1)
    ok = all(r.success for r in recs)
    return ok, ", ".join(f"{r.solver} err {r.err:.1e}" for r in recs)


CHECKS = [
    ("geometry", check_geometry),
    ("derivatives", check_derivatives),
    ("dense operators", check_dense_operators),
    ("dual-path forward model", check_dual_path),
    ("tangent projector", check_tangent_projector),
    ("small recovery", check_small_recovery),
]


def run_selftest(seed=0):
    results = []
    for i, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, reported as such
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
