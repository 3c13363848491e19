"""Command-line front end.

Results go to stdout as JSON (or CSV with ``--format csv``) and include a
``config`` echo that re-parses to the same ExperimentConfig. Exit codes:
0 success, 2 configuration error, 3 numeric/domain error.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import classifiers, divergences, exponents, simulation
from .distributions import as_distribution, bernoulli
from .errors import DomainError

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
SIG = 12
FIG1_PANEL_A = ["n", "beta2_hat", "stderr", "target"]
FIG1_PANEL_B = ["n", "log_max_beta1_hat", "stderr_log", "log_theoretical"]
# fixed keys that never belong to an experiment's parameters
_META = {"command", "config", "format", "out", "threads", "func"}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"command": self.command, **self.params}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        command = d.pop("command", None)
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        allowed = _param_names(command)
        unknown = sorted(set(d) - allowed)
        if unknown:
            raise ConfigError(f"unknown keys for {command}: {', '.join(unknown)}")
        return cls(command, d)


def fmt(x):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    if isinstance(x, np.ndarray):
        return fmt(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not math.isfinite(x) else float(f"{x:.{SIG}g}")
    return x


def parse_grid(text):
    """``start:stop:step`` (inclusive) or a comma list of integers."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad grid {text!r}; expected start:stop:step")
        start, stop, step = (int(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid {text!r}")
        return list(range(start, stop + 1, step))
    return [int(v) for v in text.split(",")]


def _floats(text):
    return [float(v) for v in str(text).split(",")]


def _seq(text):
    return np.array([int(v) for v in str(text).split(",") if v != ""], dtype=int)


def load_dists(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("dists", [data[k] for k in sorted(data)])
    return [as_distribution(p, f"P{j + 1}") for j, p in enumerate(data)]


def _dists(args, need):
    """Laws from ``--dists`` or the Bernoulli shorthands ``--p1 --p2 --p3``."""
    if getattr(args, "dists", None):
        dists = load_dists(args.dists)
    elif getattr(args, "ps", None):
        dists = [bernoulli(p) for p in _floats(args.ps)]
    else:
        dists = []
        for name in ("p1", "p2", "p3")[:need]:
            v = getattr(args, name, None)
            if v is None:
                raise ConfigError(f"--{name} (or --dists) is required")
            dists.append(bernoulli(v))
    if len(dists) < need:
        raise ConfigError(f"need {need} distributions, got {len(dists)}")
    return dists


def _seed(args):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("GUTMANLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"GUTMANLAB_SEED must be an integer, got {env!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_divergence(args):
    p1, p2 = _dists(args, 2)[:2]
    wanted = [k for k in ("kl", "gjs", "dispersion", "third_moment") if getattr(args, k)]
    if args.renyi is None and not wanted:
        wanted = ["kl", "gjs", "dispersion", "third_moment"]
    out = {}
    if "kl" in wanted:
        out["kl"] = divergences.kl(p1, p2)
    if "gjs" in wanted:
        out["gjs"] = divergences.gjs(p1, p2, args.alpha)
    if "dispersion" in wanted:
        out["dispersion"] = divergences.dispersion_v(p1, p2, args.alpha)
    if "third_moment" in wanted:
        out["third_moment"] = divergences.third_moment_t(p1, p2, args.alpha)
    if args.renyi is not None:
        out["renyi"] = divergences.renyi(args.renyi, p1, p2)
    return out


def _solution(sol):
    return {"value": sol.value, "minimizers": [np.asarray(q) for q in sol.minimizers],
            "multiplier": sol.multiplier, "converged": sol.converged,
            "residual": sol.residual}


def cmd_exponent(args):
    if args.kind == "k":
        pj, pi, pk = _dists(args, 3)[:3]
        return _solution(exponents.exponent_k(pj, pi, pk, args.alpha, args.lam))
    p1, p2 = _dists(args, 2)[:2]
    if args.kind == "fn":
        if args.n is None:
            raise ConfigError("--n is required for --kind fn")
        return _solution(exponents.exponent_fn(p1, p2, args.alpha, args.lam, args.n))
    return _solution(exponents.exponent_f(p1, p2, args.alpha, args.lam))


def cmd_threshold(args):
    mode = args.mode
    if mode == "chi2_dual":
        k = args.alphabet_size
        if k is None:
            k = len(_dists(args, 1)[0]) if (args.dists or args.p1 is not None) else 2
        return {"lambda": classifiers.threshold_chi2_dual(args.n, k, args.epsilon)}
    if mode == "multi":
        dists = _dists(args, 2)
        eps = _floats(args.epsilon_vector) if args.epsilon_vector else [args.epsilon]
        return {"lambda": classifiers.multi_threshold(dists, args.alpha, args.n, eps)}
    p1, p2 = _dists(args, 2)[:2]
    lam = classifiers.threshold_second_order(p1, p2, args.alpha, args.n, args.epsilon)
    out = {"lambda_hat": lam}
    if mode == "gutman_corrected":
        out["lambda"] = classifiers.threshold_gutman_corrected(lam, args.n, args.alpha, len(p1))
    else:
        out["lambda"] = lam
    return out


def cmd_classify(args):
    xs = [_seq(x) for x in args.x]
    y = _seq(args.y)
    if args.rule in ("gutman", "reject") and len(xs) < (1 if args.rule == "gutman" else 2):
        raise ConfigError(f"rule {args.rule} needs more --x sequences")
    if args.rule == "gutman":
        v = classifiers.gutman_binary_classify(xs[0], y, args.alpha, args.lam)
    elif args.rule == "reject":
        lam2 = args.lam if args.lambda2 is None else args.lambda2
        v = classifiers.binary_reject_classify(xs[0], xs[1], y, args.alpha, args.lam, lam2)
    elif args.rule == "unnikrishnan":
        v = classifiers.unnikrishnan_classify(xs, y, args.alpha, args.lam)
    else:
        v = classifiers.gutman_multi_classify(xs, y, args.alpha, args.lam)
    return {"decision": v.label, "index": v.decision, "tie": v.tie}


def _binary_lambda(args, p1, p2, n):
    if args.lam is not None:
        return args.lam
    if args.epsilon is None:
        raise ConfigError("give --lambda or --epsilon")
    return classifiers.threshold_second_order(p1, p2, args.alpha, n, args.epsilon)


def cmd_simulate_binary(args):
    p1, p2 = _dists(args, 2)[:2]
    seed = _seed(args)
    rows = []
    for n in parse_grid(str(args.n)):
        lam = _binary_lambda(args, p1, p2, n)
        r = simulation.mc_binary(p1, p2, args.alpha, n, lam, args.trials, seed, args.threads)
        rows.append({"n": n, "lambda": lam, "beta1_hat": r.estimates["beta1"],
                     "beta1_stderr": r.stderr["beta1"], "beta2_hat": r.estimates["beta2"],
                     "beta2_stderr": r.stderr["beta2"]})
    return {"rows": rows, "seed": seed}


def cmd_simulate_multi(args):
    dists = _dists(args, 2)
    seed = _seed(args)
    lam = args.lam
    if lam is None:
        if args.epsilon is None:
            raise ConfigError("give --lambda or --epsilon")
        lam = classifiers.multi_threshold(dists, args.alpha, args.n, [args.epsilon] * len(dists))
    r = simulation.mc_multi(dists, args.alpha, args.n, lam, args.rule, args.trials, seed,
                            args.threads)
    return {"lambda": lam, "estimates": r.estimates, "stderr": r.stderr, "trials": r.trials,
            "seed": seed}


def cmd_exact(args):
    p1, p2 = _dists(args, 2)[:2]
    lam = _binary_lambda(args, p1, p2, args.n)
    e = simulation.exact_binary(p1, p2, args.alpha, args.n, lam)
    return {"lambda": lam, "beta1": e.beta1, "beta2": e.beta2,
            "enumerated_cells": e.enumerated_cells}


def cmd_max_type1(args):
    seed = _seed(args)
    res = simulation.max_type1_search(args.alpha, args.n, args.lam, args.grid_step,
                                      args.trials, seed, args.threads)
    est = res.report.estimates["max_beta1"]
    return {"max_beta1": est, "stderr": res.report.stderr["max_beta1"],
            "argmax_p": float(res.argmax[1]), "seed": seed}


def cmd_weak_convergence(args):
    p = bernoulli(args.p) if args.dists is None else load_dists(args.dists)[0]
    seed = _seed(args)
    res = simulation.weak_convergence_check(p, args.alpha, args.n, args.trials, seed,
                                            args.threads)
    return {"ks_distance": res.ks_distance, "degenerate": res.degenerate, "seed": seed}


def fig1_panel_a(n_grid, trials, seed, threads=1, alpha=2.0, epsilon=0.2):
    p1, p2 = bernoulli(0.2), bernoulli(0.4)
    rows = []
    for n in n_grid:
        lam = classifiers.threshold_second_order(p1, p2, alpha, n, epsilon)
        r = simulation.mc_binary(p1, p2, alpha, n, lam, trials, seed, threads)
        rows.append({"n": n, "beta2_hat": r.estimates["beta2"],
                     "stderr": r.stderr["beta2"], "target": epsilon})
    return rows


def fig1_panel_b(n_grid, trials, seed, threads=1, alpha=2.0, epsilon=0.2, grid_step=0.01):
    p1, p2 = bernoulli(0.2), bernoulli(0.228)
    rows = []
    for n in n_grid:
        lam = classifiers.threshold_second_order(p1, p2, alpha, n, epsilon)
        res = simulation.max_type1_search(alpha, n, lam, grid_step, trials, seed, threads)
        est = res.report.estimates["max_beta1"]
        se = res.report.stderr["max_beta1"]
        rows.append({"n": n, "log_max_beta1_hat": math.log(est) if est > 0 else -math.inf,
                     "stderr_log": se / est if est > 0 else math.inf,
                     "log_theoretical": -n * lam})
    return rows


def cmd_reproduce_fig1(args):
    seed = _seed(args)
    if args.panel == "a":
        grid = parse_grid(args.n_grid or "1000:5000:200")
        return {"columns": FIG1_PANEL_A,
                "rows": fig1_panel_a(grid, args.trials, seed, args.threads)}
    grid = parse_grid(args.n_grid or "1000:5000:500")
    return {"columns": FIG1_PANEL_B,
            "rows": fig1_panel_b(grid, args.trials, seed, args.threads,
                                 grid_step=args.grid_step)}


COMMANDS = {
    "divergence": cmd_divergence,
    "exponent": cmd_exponent,
    "threshold": cmd_threshold,
    "classify": cmd_classify,
    "simulate-binary": cmd_simulate_binary,
    "simulate-multi": cmd_simulate_multi,
    "exact": cmd_exact,
    "max-type1": cmd_max_type1,
    "weak-convergence": cmd_weak_convergence,
    "reproduce-fig1": cmd_reproduce_fig1,
}


REQUIRED = {
    "exponent": ["lam"],
    "threshold": ["n"],
    "classify": ["x", "y", "lam"],
    "simulate-binary": ["n"],
    "simulate-multi": ["n"],
    "exact": ["n"],
    "max-type1": ["n", "lam"],
    "weak-convergence": ["n"],
    "reproduce-fig1": ["panel"],
}


# ---------------------------------------------------------------------------
# parser


def _add_dists(p, third=False):
    p.add_argument("--p1", type=float, help="Bernoulli parameter of P1")
    p.add_argument("--p2", type=float, help="Bernoulli parameter of P2")
    if third:
        p.add_argument("--p3", type=float, help="Bernoulli parameter of P3")
    p.add_argument("--dists", help="JSON file with a list of probability vectors")


def _add_run(p, trials=100_000):
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=None,
                   help="defaults to $GUTMANLAB_SEED, else 0")


def build_parser():
    parser = argparse.ArgumentParser(prog="gutmanlab",
                                     description="Universal classification with empirical types.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameters; flags override it")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
    common.add_argument("--alpha", type=float, default=2.0)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("divergence", parents=[common])
    _add_dists(p)
    for flag in ("kl", "gjs", "dispersion", "third-moment"):
        p.add_argument(f"--{flag}", action="store_true")
    p.add_argument("--renyi", type=float, metavar="GAMMA")

    p = sub.add_parser("exponent", parents=[common])
    _add_dists(p, third=True)
    p.add_argument("--kind", choices=["f", "k", "fn"], default="f")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--n", type=int)

    p = sub.add_parser("threshold", parents=[common])
    _add_dists(p)
    p.add_argument("--ps", help="comma list of Bernoulli parameters (multi mode)")
    p.add_argument("--mode", default="second_order",
                   choices=["second_order", "gutman_corrected", "chi2_dual", "multi"])
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--epsilon-vector", help="comma list, one target per hypothesis")
    p.add_argument("--alphabet-size", type=int)

    p = sub.add_parser("classify", parents=[common])
    p.add_argument("--rule", choices=["gutman", "reject", "unnikrishnan", "gutman_multi"],
                   default="gutman")
    p.add_argument("--x", action="append",
                   help="training sequence as comma-separated symbols (repeat per hypothesis)")
    p.add_argument("--y", help="test sequence")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda2", type=float)

    p = sub.add_parser("simulate-binary", parents=[common])
    _add_dists(p)
    p.add_argument("--n", help="sample size or start:stop:step grid")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--epsilon", type=float)
    _add_run(p)

    p = sub.add_parser("simulate-multi", parents=[common])
    p.add_argument("--ps", help="comma list of Bernoulli parameters")
    p.add_argument("--dists", help="JSON file with a list of probability vectors")
    p.add_argument("--rule", choices=sorted(simulation.RULES), default="unnikrishnan")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--epsilon", type=float)
    _add_run(p)

    p = sub.add_parser("exact", parents=[common])
    _add_dists(p)
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("max-type1", parents=[common])
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--grid-step", type=float, default=0.01)
    _add_run(p, trials=10_000)

    p = sub.add_parser("weak-convergence", parents=[common])
    p.add_argument("--p", type=float, default=0.3, help="Bernoulli parameter")
    p.add_argument("--dists", help="JSON file; the first vector is used")
    p.add_argument("--n", type=int)
    _add_run(p, trials=10_000)

    p = sub.add_parser("reproduce-fig1", parents=[common])
    p.add_argument("--panel", choices=["a", "b"])
    p.add_argument("--n-grid")
    p.add_argument("--grid-step", type=float, default=0.01)
    _add_run(p)
    return parser


_PARSER = build_parser()


def _subparsers():
    action = next(a for a in _PARSER._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices


def _param_names(command):
    p = _subparsers()[command]
    return {a.dest for a in p._actions if a.dest != "help"} - _META


def _emit(result, args, cfg):
    if args.format == "csv":
        rows = result.get("rows")
        if rows is None:
            rows = [{k: v for k, v in result.items() if not isinstance(v, (dict, list))}]
        columns = result.get("columns") or list(rows[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([f"{r[c]:.{SIG}g}" if isinstance(r[c], float) else r[c] for c in columns])
        text = buf.getvalue()
    else:
        payload = {k: v for k, v in result.items() if k != "columns"}
        payload["config"] = cfg.to_dict()
        text = json.dumps(fmt(payload), indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _PARSER.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG
    try:
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
            raw.setdefault("command", args.command)
            if raw["command"] != args.command:
                raise ConfigError(f"config is for {raw['command']!r}, not {args.command!r}")
            loaded = ExperimentConfig.from_dict(raw)
            sp = _subparsers()[args.command]
            saved = {k: sp.get_default(k) for k in loaded.params}
            sp.set_defaults(**loaded.params)
            try:
                args = _PARSER.parse_args(argv)
            finally:
                sp.set_defaults(**saved)
        missing = [k for k in REQUIRED.get(args.command, ()) if getattr(args, k) is None]
        if missing:
            raise ConfigError("missing required parameters: " + ", ".join(missing))
        names = _param_names(args.command)
        cfg = ExperimentConfig(args.command, {k: getattr(args, k) for k in sorted(names)
                                              if getattr(args, k) is not None})
        result = COMMANDS[args.command](args)
        _emit(result, args, cfg)
    except (ConfigError, OSError, json.JSONDecodeError) as e:
        print(f"gutmanlab: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as e:
        print(f"gutmanlab: domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
