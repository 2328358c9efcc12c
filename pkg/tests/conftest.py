"""Shared helpers: small random instances and dense operator oracles."""

import numpy as np
import pytest

from blindmix.cost import CostContext
from blindmix.measurement import build_ensemble, synthesize_observation
from blindmix.metrics import draw_ground_truth


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def small_problem(seed, N=4, K=3, s=2, L=16, kind="gaussian", sigma=0.0):
    rng = np.random.default_rng(seed)
    ens = build_ensemble(kind, L, N, K, s, seed)
    truth = draw_ground_truth(N, K, s, L, "gaussian", rng)
    obs = synthesize_observation(ens, truth.X, truth.H, sigma=sigma, noise_seed=seed + 1)
    return ens, truth, CostContext(ens, obs.y), rng


def dense_A(ens, k, i):
    """A_ki as an explicit N x K matrix with ``y_i = sum(A_ki * (x h^T))``."""
    return np.outer(ens.fc[k][i], ens.B[i])


def dense_J(ens, k, i):
    """J_ki as an (N+K) x (N+K) block matrix, A_ki in the top-right block."""
    J = np.zeros((ens.n, ens.n), dtype=complex)
    J[: ens.N, ens.N:] = dense_A(ens, k, i)
    return J


def dense_objective(ens, y, V):
    r = -np.asarray(y, dtype=complex)
    for k in range(ens.s):
        M = np.outer(V[k], np.conj(V[k]))
        r = r + np.array([np.sum(dense_J(ens, k, i) * M) for i in range(ens.L)])
    return float(np.real(np.vdot(r, r))), r


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
