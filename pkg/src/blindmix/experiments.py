"""Seeded experiment drivers: convergence traces, phase transitions, noise
and condition-number sweeps.

Every random draw comes from ``SeedSequence(base_seed, spawn_key=(trial,
role, user))``, so a trial's instance does not depend on how many trials,
sweep points or other users are run alongside it. Within a trial the same
signals, channels and encoders are reused across sigma and kappa values.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cost import CostContext
from .errors import BlindMixError, UnsupportedSizeError
from .measurement import (
    MeasurementEnsemble,
    build_gaussian_encoding,
    build_hadamard_encoding,
    build_partial_dft,
    is_hadamard_size,
    synthesize_observation,
)
from .metrics import (
    SUCCESS_THRESHOLD,
    GroundTruth,
    draw_ground_truth,
    lift,
    point_error,
    relative_error,
    scale_to_kappa,
)
from .records import TrialRecord
from .solvers import RgdConfig, TrustRegionConfig, fiht_run, rgd_run, rtr_run, spectral_init

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "Instance",
    "SOLVERS",
    "default_config",
    "log_log_slope",
    "make_instance",
    "mean_error_by_sigma",
    "run_cond_sweep",
    "run_convergence",
    "run_experiment",
    "run_noise_sweep",
    "run_phase_transition",
    "run_trial",
    "success_rates",
]

SOLVERS = ("rgd", "rtr", "fiht")
EXPERIMENTS = ("convergence", "phase_transition", "noise_sweep", "cond_sweep", "demo")

ROLE_SIGNAL, ROLE_ENCODER, ROLE_NOISE = range(3)


def _as_tuple(v):
    if v is None:
        return ()
    if np.isscalar(v):
        return (v,)
    return tuple(v)


@dataclass
class ExperimentConfig:
    experiment: str = "convergence"
    N: int = 50
    K: int = 50
    L: int = 1250
    s: tuple = (5,)
    encoder: str = "gaussian"
    signal: str = "gaussian"
    solvers: tuple = ("rtr",)
    trials: int = 1
    sigma: tuple = (0.0,)
    kappa: tuple = (None,)
    seed: int = 0
    alpha: float | None = None
    max_iters: int = 500
    grad_tol: float = 1e-8
    keep_trace: bool = True
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        self.s = tuple(int(v) for v in _as_tuple(self.s))
        self.sigma = tuple(float(v) for v in _as_tuple(self.sigma))
        self.kappa = tuple(None if v is None else float(v) for v in _as_tuple(self.kappa)) or (None,)
        self.solvers = tuple(_as_tuple(self.solvers))
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if min(self.N, self.K, self.L) <= 0 or not self.s or min(self.s) <= 0:
            raise ValueError("dimensions must be positive")
        if self.L <= max(self.N, self.K):
            raise ValueError(f"need L > max(N, K), got L={self.L}, N={self.N}, K={self.K}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.encoder not in ("gaussian", "hadamard"):
            raise ValueError(f"unknown encoder {self.encoder!r}")
        if self.encoder == "hadamard" and not is_hadamard_size(self.L):
            raise UnsupportedSizeError(f"no Hadamard matrix of order {self.L} is available")
        if self.signal not in ("gaussian", "qam16"):
            raise ValueError(f"unknown signal {self.signal!r}")
        bad = [v for v in self.solvers if v not in SOLVERS]
        if bad or not self.solvers:
            raise ValueError(f"unknown solver(s) {bad}")
        if any(v < 0 for v in self.sigma) or not self.sigma:
            raise ValueError("sigma must be nonnegative")
        if any(k is not None and k < 1 for k in self.kappa):
            raise ValueError("kappa must be at least 1")
        if self.experiment == "cond_sweep" and self.s != (2,):
            raise ValueError("the condition-number sweep uses s = 2")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.max_iters < 0 or not self.grad_tol > 0:
            raise ValueError("max_iters must be >= 0 and grad_tol > 0")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")


# Reference settings per (experiment, encoder).
_DEFAULTS = {
    ("convergence", "gaussian"): dict(N=50, K=50, L=1250, s=(5,), solvers=SOLVERS),
    ("convergence", "hadamard"): dict(N=50, K=50, L=1536, s=(5,), solvers=SOLVERS),
    ("phase_transition", "gaussian"): dict(N=50, K=50, L=1000, s=tuple(range(1, 13)), trials=10),
    ("phase_transition", "hadamard"): dict(N=16, K=16, L=1536, s=tuple(range(1, 46)), trials=10),
    ("noise_sweep", "gaussian"): dict(N=50, K=50, L=1500, s=(2,), trials=10,
                                      sigma=(1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1)),
    ("noise_sweep", "hadamard"): dict(N=16, K=16, L=1536, s=(2,), trials=10,
                                      sigma=(1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1)),
    ("cond_sweep", "gaussian"): dict(N=50, K=50, L=1250, s=(2,), kappa=(1.0, 10.0, 20.0)),
    ("cond_sweep", "hadamard"): dict(N=50, K=50, L=1536, s=(2,), kappa=(1.0, 10.0, 20.0)),
    ("demo", "gaussian"): dict(N=16, K=8, L=512, s=(2,), signal="qam16"),
    ("demo", "hadamard"): dict(N=16, K=8, L=512, s=(2,), signal="qam16"),
}


def default_config(experiment, encoder="gaussian", **overrides):
    """The reference setting for an experiment, updated by ``overrides``."""
    base = dict(_DEFAULTS[(experiment, encoder)])
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(experiment=experiment, encoder=encoder, **base)


def _rng(seed, trial, role, user=0):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, role, user)))


def _seed_int(seed, trial, role, user=0):
    ss = np.random.SeedSequence(seed, spawn_key=(trial, role, user))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass
class Instance:
    ensemble: MeasurementEnsemble
    truth: object
    y: np.ndarray
    sigma: float
    kappa: float


def make_instance(config, trial, s, sigma=0.0, kappa=None):
    """Draw (or re-draw, bit-for-bit) the instance of one trial."""
    N, K, L = config.N, config.K, config.L
    build = build_gaussian_encoding if config.encoder == "gaussian" else build_hadamard_encoding
    encoders = [build(L, N, _seed_int(config.seed, trial, ROLE_ENCODER, k)) for k in range(s)]
    ensemble = MeasurementEnsemble(encoders, build_partial_dft(L, K))
    users = [draw_ground_truth(N, K, 1, L, config.signal, _rng(config.seed, trial, ROLE_SIGNAL, k))
             for k in range(s)]
    X = np.concatenate([u.X for u in users])
    H = np.concatenate([u.H for u in users])
    messages = [u.messages[0] for u in users] if config.signal == "qam16" else None
    if kappa is not None:
        X, H = scale_to_kappa(X, H, kappa)
    truth = GroundTruth(X, H, messages)
    obs = synthesize_observation(ensemble, X, H, sigma=sigma,
                                 noise_seed=_seed_int(config.seed, trial, ROLE_NOISE))
    norms = truth.component_norms()
    return Instance(ensemble, truth, obs.y, sigma, float(norms.max() / norms.min()))


def run_solver(name, ensemble, y, V0, truth, config):
    """Run one solver from ``V0``; returns the final lifted estimates and the trace."""
    if name == "fiht":
        target = truth.lifted
        W, trace = fiht_run(ensemble, y, max_iters=config.max_iters, tol=config.grad_tol,
                            error_fn=lambda W: relative_error(W, target))
        return W, trace
    ctx = CostContext(ensemble, y)
    err = lambda V: point_error(V, truth)  # noqa: E731
    if name == "rgd":
        cfg = RgdConfig(alpha=config.alpha, max_iters=config.max_iters, grad_tol=config.grad_tol)
        V, trace = rgd_run(ctx, V0, cfg, error_fn=err)
    else:
        cfg = TrustRegionConfig(max_iters=config.max_iters, grad_tol=config.grad_tol)
        V, trace = rtr_run(ctx, V0, cfg, error_fn=err)
    N = ensemble.N
    return lift(V[:, :N], np.conj(V[:, N:])), trace


def _record(config, solver, s, sigma, kappa, trial, **kw):
    return TrialRecord(
        experiment=config.experiment, encoder=config.encoder, solver=solver,
        N=config.N, K=config.K, L=config.L, s=s, sigma=float(sigma),
        kappa=float(kappa), seed=config.seed, trial=trial, **kw,
    )


def run_trial(config, trial, s, sigma=0.0, kappa=None, return_estimates=False):
    """All configured solvers on one instance from a shared spectral init.

    Solver failures are stored in the record's ``status`` instead of raised.
    """
    inst = make_instance(config, trial, s, sigma, kappa)
    records, estimates = [], {}
    try:
        V0 = spectral_init(inst.ensemble, inst.y)
    except BlindMixError as exc:
        for name in config.solvers:
            records.append(_record(config, name, s, sigma, inst.kappa, trial, success=False,
                                   err=float("nan"), iterations=0, time_ms=0.0,
                                   status=f"error: {type(exc).__name__}: {exc}"))
        return (records, estimates) if return_estimates else records
    for name in config.solvers:
        t0 = time.perf_counter()
        try:
            W, trace = run_solver(name, inst.ensemble, inst.y, V0, inst.truth, config)
            err = relative_error(W, inst.truth.lifted)
            status = trace.stop_reason
            iters = trace.iterations
            rows = trace.rows if config.keep_trace else []
            estimates[name] = W
        except (BlindMixError, ArithmeticError) as exc:
            err, status, iters, rows = float("nan"), f"error: {type(exc).__name__}: {exc}", 0, []
        elapsed = 1e3 * (time.perf_counter() - t0)
        records.append(_record(config, name, s, sigma, inst.kappa, trial,
                               success=bool(err <= SUCCESS_THRESHOLD), err=float(err),
                               iterations=int(iters), time_ms=elapsed, status=status, trace=rows))
    return (records, estimates) if return_estimates else records


def _workers():
    try:
        return max(1, int(os.environ.get("BLINDMIX_THREADS", "1")))
    except ValueError:
        return 1


def _call(task):
    config, trial, s, sigma, kappa = task
    return run_trial(config, trial, s, sigma, kappa)


def _run_tasks(tasks):
    workers = min(_workers(), len(tasks))
    if workers <= 1:
        out = [_call(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_call, tasks))
    return [rec for recs in out for rec in recs]


def run_convergence(config):
    config = replace(config, experiment="convergence")
    return _run_tasks([(config, t, s, config.sigma[0], None)
                       for s in config.s for t in range(config.trials)])


def run_phase_transition(config):
    config = replace(config, experiment="phase_transition", keep_trace=False)
    return _run_tasks([(config, t, s, config.sigma[0], None)
                       for s in config.s for t in range(config.trials)])


def run_noise_sweep(config):
    config = replace(config, experiment="noise_sweep", keep_trace=False)
    return _run_tasks([(config, t, s, sigma, None) for s in config.s
                       for sigma in config.sigma for t in range(config.trials)])


def run_cond_sweep(config):
    config = replace(config, experiment="cond_sweep")
    if config.s != (2,):
        raise ValueError("the condition-number sweep uses s = 2")
    kappas = [k for k in config.kappa if k is not None] or [1.0, 10.0, 20.0]
    return _run_tasks([(config, t, 2, config.sigma[0], k)
                       for k in kappas for t in range(config.trials)])


def run_experiment(config):
    runner = {
        "convergence": run_convergence,
        "phase_transition": run_phase_transition,
        "noise_sweep": run_noise_sweep,
        "cond_sweep": run_cond_sweep,
    }[config.experiment]
    return runner(config)


def success_rates(records, solver="rtr"):
    """Empirical success probability per ``s``, as a sorted dict."""
    out = {}
    for rec in records:
        if rec.solver == solver:
            out.setdefault(rec.s, []).append(rec.success)
    return {s: float(np.mean(v)) for s, v in sorted(out.items())}


def mean_error_by_sigma(records, solver="rtr"):
    """``{sigma: (snr_db, mean err, mean err in dB)}``; SNR is ``-20 log10 sigma``."""
    out = {}
    for rec in records:
        if rec.solver == solver:
            out.setdefault(rec.sigma, []).append(rec.err)
    table = {}
    for sigma, errs in sorted(out.items()):
        m = float(np.mean(errs))
        snr = -20 * np.log10(sigma) if sigma > 0 else np.inf
        table[sigma] = (float(snr), m, float(20 * np.log10(m)) if m > 0 else -np.inf)
    return table


def log_log_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
