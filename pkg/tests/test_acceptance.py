"""The ten acceptance criteria at their stated settings and tolerances.

Each test records a one-line verdict; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""

import time

import numpy as np
import pytest
from scipy.optimize import isotonic_regression

from blindmix.cost import CostContext
from blindmix.experiments import (
    ExperimentConfig,
    default_config,
    log_log_slope,
    make_instance,
    mean_error_by_sigma,
    run_cond_sweep,
    run_convergence,
    run_noise_sweep,
    run_phase_transition,
    success_rates,
)
from blindmix.manifold import (
    horizontal_coefficient,
    horizontal_project,
    is_horizontal,
    metric,
    product_metric,
    random_horizontal,
)
from blindmix.measurement import build_ensemble, synthesize_observation
from blindmix.metrics import SUCCESS_THRESHOLD, relative_error
from blindmix.signal_chain import ChannelImpulse, fourier_observation, receive_time_domain
from blindmix.solvers import RgdConfig, fiht_run, rgd_run, spectral_init, tangent_project

from conftest import cn, dense_A, dense_J, small_problem
from test_cost import dense_egrad, dense_ehess

RESULTS = {}


def report(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def summary_lines():
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
            for n, (ok, detail) in sorted(RESULTS.items())]


def test_criterion_01_geometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = dict(idem=0.0, real=0.0, vert=0.0, fiber=0.0)
    horizontal = True
    for _ in range(100):
        N, K, s = (int(v) for v in rng.integers(1, [9, 9, 4]))
        V, eta = cn(rng, s, N + K), cn(rng, s, N + K)
        P = horizontal_project(V, eta)
        a = horizontal_coefficient(V, eta)
        worst["idem"] = max(worst["idem"], np.abs(horizontal_project(V, P) - P).max() / max(1, np.abs(P).max()))
        worst["real"] = max(worst["real"], float(np.max(np.abs(a.real) - 1e-13 * np.abs(a))))
        worst["vert"] = max(worst["vert"], max(abs(metric(V[k], P[k], 1j * V[k])) for k in range(s)))
        horizontal &= is_horizontal(V, P)
        _, _, ctx, _ = small_problem(int(rng.integers(2**31)), N, K, s, L=2 * (N + K) + 1)
        W = cn(rng, s, N + K)
        f0 = ctx.objective(W)
        f1 = ctx.objective(W * np.exp(1j * rng.uniform(0, 2 * np.pi, (s, 1))))
        worst["fiber"] = max(worst["fiber"], abs(f1 - f0) / max(f0, 1.0))
    elapsed = time.perf_counter() - t0
    ok = (worst["idem"] < 1e-12 and worst["real"] < 1e-15 and worst["vert"] < 1e-11
          and worst["fiber"] < 1e-12 and horizontal and elapsed < 10)
    report(1, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.2f} s")


def test_criterion_02_derivatives():
    t0 = time.perf_counter()
    _, _, ctx, rng = small_problem(202, N=6, K=5, s=3, L=60)
    V = cn(rng, 3, 11)
    g = ctx.riemannian_gradient(V)
    wg = wh = wsa = 0.0
    for _ in range(20):
        eta = random_horizontal(V, rng)
        t = 1e-6
        fd = (ctx.objective(V + t * eta) - ctx.objective(V - t * eta)) / (2 * t)
        wg = max(wg, abs(fd - product_metric(V, g, eta)) / abs(fd))
        fdh = (ctx.euclidean_gradient(V + t * eta) - ctx.euclidean_gradient(V - t * eta)) / (2 * t)
        hv = ctx.euclidean_hessian_vec(V, eta)
        wh = max(wh, np.linalg.norm(fdh - hv) / np.linalg.norm(hv))
        zeta = random_horizontal(V, rng)
        a = product_metric(V, ctx.riemannian_hessian_vec(V, eta), zeta)
        b = product_metric(V, eta, ctx.riemannian_hessian_vec(V, zeta))
        wsa = max(wsa, abs(a - b) / max(abs(a), 1.0))
    H = random_horizontal(V, rng)
    f0, gH = ctx.objective(V), product_metric(V, H, g)
    hH = product_metric(V, H, ctx.riemannian_hessian_vec(V, H))
    ratios = [abs(ctx.objective(V + t * H) - f0 - t * gH - 0.5 * t * t * hH) / t ** 3 for t in (1e-2, 1e-3, 1e-4)]
    taylor = ratios[2] < 2 * ratios[0] + 1e-3 and abs(ratios[1] - ratios[0]) < 0.1 * ratios[0]
    elapsed = time.perf_counter() - t0
    ok = wg < 1e-5 and wh < 1e-4 and wsa < 1e-8 and taylor and elapsed < 30
    report(2, ok, f"grad {wg:.1e}, hess {wh:.1e}, self-adjoint {wsa:.1e}, "
                  f"remainder/t^3 {ratios[0]:.3g},{ratios[1]:.3g},{ratios[2]:.3g}, {elapsed:.2f} s")


def test_criterion_03_dense_equivalence():
    worst = 0.0
    for seed, (N, K, s, L) in enumerate([(4, 3, 2, 16), (2, 2, 1, 4), (3, 4, 3, 12), (4, 4, 2, 16)]):
        for kind in ("gaussian", "hadamard") if L in (4, 16, 12) else ("gaussian",):
            ens, _, ctx, rng = small_problem(300 + seed, N, K, s, L, kind=kind)
            for k in range(s):
                x, h = cn(rng, N), cn(rng, K)
                dA = np.array([np.sum(dense_A(ens, k, i) * np.outer(x, h)) for i in range(L)])
                worst = max(worst, np.linalg.norm(ens.forward_A(k, x, h) - dA) / np.linalg.norm(dA))
                w = np.concatenate([x, np.conj(h)])
                dJ = np.array([np.sum(dense_J(ens, k, i) * np.outer(w, w.conj())) for i in range(L)])
                worst = max(worst, np.linalg.norm(ens.forward_J(k, w) - dJ) / np.linalg.norm(dJ))
            V, E = cn(rng, s, N + K), cn(rng, s, N + K)
            G = dense_egrad(ens, ctx.y, V)
            worst = max(worst, np.linalg.norm(ctx.euclidean_gradient(V) - G) / np.linalg.norm(G))
            Hd = dense_ehess(ens, ctx.y, V, E)
            worst = max(worst, np.linalg.norm(ctx.euclidean_hessian_vec(V, E) - Hd) / np.linalg.norm(Hd))
    report(3, worst < 1e-11, f"max relative deviation {worst:.1e}")


def test_criterion_04_dual_path():
    rng = np.random.default_rng(404)
    worst = 0.0
    for kind, L in [("gaussian", 64), ("gaussian", 250), ("hadamard", 128), ("hadamard", 96)]:
        N, K, s = 10, 7, 3
        ens = build_ensemble(kind, L, N, K, s, int(rng.integers(2**31)))
        X, H = cn(rng, s, N), cn(rng, s, K)
        z = receive_time_domain(list(X), [e.time_domain for e in ens.encoders],
                                [ChannelImpulse(h, L) for h in H])
        y = synthesize_observation(ens, X, H).y
        worst = max(worst, np.linalg.norm(fourier_observation(z) - y) / np.linalg.norm(y))
    report(4, worst < 1e-10, f"max relative difference {worst:.1e}")


@pytest.fixture(scope="module")
def reference_setting_runs():
    cfg = default_config("convergence", solvers=("rgd", "rtr"), trials=10)
    return run_convergence(cfg)


def _tail_r2(trace, n=50):
    e = np.log10(np.array([r.err for r in trace]))
    it = np.arange(len(e))[-n:]
    e = e[-n:]
    fit = np.polyval(np.polyfit(it, e, 1), it)
    return 1 - np.sum((e - fit) ** 2) / np.sum((e - e.mean()) ** 2)


def test_criterion_05_exact_recovery(reference_setting_runs):
    recs = reference_setting_runs
    rtr = {r.trial: r for r in recs if r.solver == "rtr"}
    rgd = {r.trial: r for r in recs if r.solver == "rgd"}
    n_rtr = sum(r.err <= SUCCESS_THRESHOLD for r in rtr.values())
    n_rgd = sum(r.err <= SUCCESS_THRESHOLD and r.iterations <= 500 for r in rgd.values())
    faster = all(rtr[t].iterations < rgd[t].iterations for t in rtr)
    r2 = min(_tail_r2(r.trace) for r in rgd.values() if r.err <= SUCCESS_THRESHOLD)
    ok = n_rtr >= 9 and n_rgd >= 9 and faster and r2 > 0.95
    report(5, ok, f"RTR {n_rtr}/10, RGD {n_rgd}/10, RTR fewer iterations on every instance: {faster} "
                  f"(median {np.median([r.iterations for r in rtr.values()]):.0f} vs "
                  f"{np.median([r.iterations for r in rgd.values()]):.0f}), min tail R^2 {r2:.4f}")


def test_criterion_06_phase_transition():
    cfg = default_config("phase_transition")
    rates = success_rates(run_phase_transition(cfg))
    s_vals = np.array(sorted(rates))
    p = np.array([rates[s] for s in s_vals])
    iso = isotonic_regression(p, increasing=False).x
    violation = float(np.max(np.abs(p - iso)))
    bound = cfg.L / (cfg.N + cfg.K) + 1
    beyond = [rates[s] for s in s_vals if s > bound]
    ok = rates[1] == 1.0 and violation < 0.2 and beyond and all(v == 0.0 for v in beyond)
    report(6, ok, "success " + " ".join(f"{s}:{rates[s]:.1f}" for s in s_vals)
                  + f", isotonic violation {violation:.2f}, s > {bound:.0f} all zero: {all(v == 0 for v in beyond)}")


def test_criterion_07_noise_slope():
    sigmas = (1e-3, 1e-2, 1e-1)
    cfg = default_config("noise_sweep", sigma=sigmas)
    table = mean_error_by_sigma(run_noise_sweep(cfg))
    slope = log_log_slope(sigmas, [table[s][1] for s in sigmas])
    report(7, abs(slope - 1.0) <= 0.2,
           f"slope {slope:.3f}; mean err " + ", ".join(f"{s:g}:{table[s][1]:.2e}" for s in sigmas))


def test_criterion_08_condition_number():
    cfg = default_config("cond_sweep", trials=10)
    recs = run_cond_sweep(cfg)
    kappas = (1.0, 10.0, 20.0)
    by = {k: [r for r in recs if abs(r.kappa - k) < 1e-9] for k in kappas}
    recovered = all(r.err <= SUCCESS_THRESHOLD for rs in by.values() for r in rs)
    iters = [float(np.mean([r.iterations for r in by[k]])) for k in kappas]
    ok = recovered and all(len(by[k]) == 10 for k in kappas) and iters[0] <= iters[1] <= iters[2]
    report(8, ok, f"all recovered: {recovered}, mean iterations "
                  + ", ".join(f"k={k:g}:{v:.1f}" for k, v in zip(kappas, iters)))


def test_criterion_09_complexity():
    Ls = (256, 512, 1024, 2048)
    N = K = 64
    s = 8
    per_iter = []
    for L in Ls:
        inst = make_instance(ExperimentConfig(N=N, K=K, L=L, s=s, encoder="hadamard"), 0, s)
        ctx = CostContext(inst.ensemble, inst.y)
        V0 = spectral_init(inst.ensemble, inst.y)
        cfg = RgdConfig(max_iters=40, grad_tol=1e-300)
        best = np.inf
        for _ in range(5):
            t0 = time.perf_counter()
            rgd_run(ctx, V0, cfg)
            best = min(best, (time.perf_counter() - t0) / cfg.max_iters)
        per_iter.append(best)
    slope = log_log_slope(Ls, per_iter)
    report(9, abs(slope - 1.0) <= 0.3,
           f"slope {slope:.2f}; ms/iter " + ", ".join(f"{L}:{1e3 * t:.3f}" for L, t in zip(Ls, per_iter)))


def test_criterion_10_fiht():
    cfg = default_config("convergence", solvers=("fiht",))
    inst = make_instance(cfg, 0, 5)
    ranks = set()

    def err(W):
        for Wk in W:
            sv = np.linalg.svd(Wk, compute_uv=False)
            ranks.add(int(np.sum(sv > 1e-10 * sv[0])))
        return relative_error(W, inst.truth.lifted)

    W, trace = fiht_run(inst.ensemble, inst.y, error_fn=err)
    final = relative_error(W, inst.truth.lifted)
    rng = np.random.default_rng(1010)
    worst = 0.0
    for _ in range(20):
        u, v = cn(rng, 50), cn(rng, 50)
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        Z, Y = cn(rng, 50, 50), cn(rng, 50, 50)
        P = tangent_project(u, v, Z)
        worst = max(worst, np.linalg.norm(tangent_project(u, v, P) - P) / np.linalg.norm(P),
                    abs(np.vdot(Y, P) - np.vdot(tangent_project(u, v, Y), Z)) / abs(np.vdot(Y, P)))
    ok = ranks == {1} and final <= SUCCESS_THRESHOLD and worst < 1e-11
    report(10, ok, f"iterate ranks {sorted(ranks)}, final err {final:.1e} after {trace.iterations} "
                   f"iterations, projector deviation {worst:.1e}")


if __name__ == "__main__":
    import sys

    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
