"""Command-line entry point: ``blindmix <subcommand> [flags]``.

Exit status is 0 on success, 1 when an experiment fails (a solver error, an
unrecovered demo message, or a failed self-test) and 2 on bad arguments.
"""

import argparse
import sys

import numpy as np

from .errors import UnsupportedSizeError
from .experiments import (
    SOLVERS,
    default_config,
    mean_error_by_sigma,
    run_experiment,
    run_trial,
    success_rates,
)
from .records import write_records
from .signal_chain import ofdm_demodulate, qam16_demodulate

__all__ = ["main", "parse_config_file"]

COMMANDS = {
    "demo": "demo",
    "convergence": "convergence",
    "phase-transition": "phase_transition",
    "noise-sweep": "noise_sweep",
    "cond-sweep": "cond_sweep",
    "selftest": "selftest",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _BadArgs(message)


class _BadArgs(Exception):
    pass


def _int_list(text):
    """``"5"``, ``"1,2,4"`` or the inclusive range ``"1-12"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return tuple(out)


def _float_list(text):
    try:
        return tuple(float(p) for p in str(text).split(",") if p.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_config_file(path):
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys match the flags."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file with the same keys as the flags")
    common.add_argument("--N", type=int)
    common.add_argument("--K", type=int)
    common.add_argument("--L", type=int)
    common.add_argument("--s", type=_int_list, help="number of users, a list 1,2,3 or a range 1-12")
    common.add_argument("--encoder", choices=["gaussian", "hadamard"])
    common.add_argument("--signal", choices=["gaussian", "qam16"])
    common.add_argument("--solver", choices=list(SOLVERS) + ["all"])
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--sigma", type=_float_list, help="noise level or comma-separated list")
    common.add_argument("--kappa", type=_float_list, help="condition numbers for cond-sweep")
    common.add_argument("--alpha", type=float)
    common.add_argument("--max-iters", type=int)
    common.add_argument("--grad-tol", type=float)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"])

    parser = _Parser(prog="blindmix", description="Blind demixing experiments on the quotient manifold.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_TYPES = {
    "N": int, "K": int, "L": int, "trials": int, "seed": int, "max_iters": int,
    "s": _int_list, "sigma": _float_list, "kappa": _float_list,
    "alpha": float, "grad_tol": float,
}
_KEYS = {"N", "K", "L", "s", "encoder", "signal", "solver", "trials", "seed", "sigma",
         "kappa", "alpha", "max_iters", "grad_tol", "out", "format"}


def _merge(args):
    values = {}
    if args.config:
        try:
            raw = parse_config_file(args.config)
        except OSError as exc:
            raise _BadArgs(f"cannot read config file: {exc}") from exc
        except ValueError as exc:
            raise _BadArgs(str(exc)) from exc
        unknown = set(raw) - _KEYS
        if unknown:
            raise _BadArgs(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key, value in raw.items():
            try:
                values[key] = _TYPES.get(key, str)(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise _BadArgs(f"config key {key}: {exc}") from exc
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def _config(experiment, values):
    values = dict(values)
    encoder = values.pop("encoder", "gaussian")
    solver = values.pop("solver", None)
    if solver is not None:
        values["solvers"] = SOLVERS if solver == "all" else (solver,)
    return default_config(experiment, encoder, **values)


def _print_records(config, records):
    if config.experiment == "phase_transition":
        for solver in config.solvers:
            for s, p in success_rates(records, solver).items():
                print(f"{solver} s={s:3d} success={p:.2f}")
    elif config.experiment == "noise_sweep":
        for solver in config.solvers:
            for sigma, (snr, m, db) in mean_error_by_sigma(records, solver).items():
                print(f"{solver} sigma={sigma:.3g} snr_db={snr:.1f} mean_err={m:.3e} err_db={db:.1f}")
    else:
        for rec in sorted(records, key=lambda r: (r.solver, r.kappa, r.trial)):
            print(f"{rec.solver} s={rec.s} kappa={rec.kappa:g} trial={rec.trial} err={rec.err:.3e} "
                  f"iters={rec.iterations} time_ms={rec.time_ms:.1f} status={rec.status}")


def _demo(config):
    records, estimates = run_trial(config, 0, config.s[0], config.sigma[0], return_estimates=True)
    from .experiments import make_instance

    truth = make_instance(config, 0, config.s[0], config.sigma[0]).truth
    ok = all(r.success for r in records)
    for rec in records:
        print(f"{rec.solver}: err={rec.err:.3e} iters={rec.iterations} status={rec.status}")
        W = estimates.get(rec.solver)
        if W is None or truth.messages is None:
            continue
        for k in range(config.s[0]):
            # x_k is identifiable up to a complex scalar; the first symbol acts as a pilot
            U, S, Vh = np.linalg.svd(W[k])
            x_dir = U[:, 0]
            sym = ofdm_demodulate(x_dir)
            ref = ofdm_demodulate(truth.X[k])[0]
            recovered = qam16_demodulate(x_dir * ref / sym[0])
            sent = np.asarray(truth.messages[k])
            match = bool(np.array_equal(recovered, sent))
            ok = ok and match
            print(f"  user {k} sent      {' '.join(map(str, sent))}")
            print(f"  user {k} recovered {' '.join(map(str, recovered))}  {'ok' if match else 'MISMATCH'}")
    return records, ok


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        values = _merge(args)
        experiment = COMMANDS[args.command]
        if experiment == "selftest":
            from .selftest import run_selftest

            results = run_selftest(values.get("seed", 0))
            for name, ok, detail in results:
                print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            return 0 if all(ok for _, ok, _ in results) else 1
        config = _config(experiment, values)
    except _BadArgs:
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UnsupportedSizeError, ValueError, TypeError) as exc:
        print(f"blindmix: error: {exc}", file=sys.stderr)
        return 2

    if experiment == "demo":
        records, ok = _demo(config)
    else:
        records = run_experiment(config)
        _print_records(config, records)
        ok = not any(r.status.startswith("error") for r in records)
    if config.out:
        try:
            write_records(records, config.out, config.format)
        except OSError as exc:
            print(f"blindmix: error: {exc}", file=sys.stderr)
            return 1
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
