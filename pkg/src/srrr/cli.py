"""Command-line interface: ``srrr {simulate,fit,benchmark,montecarlo,replay}``.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
Every command writes ``manifest.json`` next to its outputs; ``srrr replay``
re-executes a manifest into a new directory.
"""

import argparse
import csv
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .baseline import SubGradConfig, fit_subgrad
from .errors import InvalidArgumentError, SrrrError
from .evalsim import Arm, GenSpec, generate, monte_carlo
from .fileio import (
    fmt, load_dataset, read_json, write_json, write_matrix_csv, write_result_json, write_trace_csv,
)
from .model import SrrrConfig
from .penalty import Penalty
from .solver import fit, initialize

log = logging.getLogger("srrr")

METHODS = ("altmin-mm", "altmin-subgrad")
TRIAL_COLUMNS = ["trial", "arm", "angle", "iters", "seconds", "recall", "precision", "max_angle", "status", "error"]


class UsageError(Exception):
    pass


def _zero_clock():
    return 0.0


def _now():
    return datetime.now(timezone.utc).isoformat()


def _add_gen_flags(p):
    p.add_argument("--P", type=int, default=7, help="number of responses")
    p.add_argument("--Q", type=int, default=5, help="number of predictors")
    p.add_argument("--r", type=int, default=3, help="true rank")
    p.add_argument("--N", type=int, default=100, help="number of samples")
    p.add_argument("--sparse-rows", type=int, default=3, help="nonzero rows in the true B")
    p.add_argument("--noise-sigma", type=float, default=0.5)


def _add_data_flags(p):
    p.add_argument("--X", help="predictor matrix CSV (Q x N)")
    p.add_argument("--Y", help="response matrix CSV (P x N)")
    p.add_argument("--data", help='JSON dataset {"X": [[...]], "Y": [[...]]}')
    p.add_argument("--center", action="store_true", help="subtract row means of X and Y")


def _add_model_flags(p):
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--penalty", choices=("none", "l1", "geman"), default="none")
    p.add_argument("--theta", type=float, default=0.05, help="Geman scale")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="global row-weight scale")
    p.add_argument("--xi", help="comma-separated per-predictor weights (default all ones)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--psi-safeguard", type=float, default=1.0 + 1e-10)
    p.add_argument("--inner-iters", type=int, default=100, help="altmin-subgrad inner steps")
    p.add_argument("--step-c", type=float, default=None, help="altmin-subgrad step scale")
    p.add_argument("--inner-tol", type=float, default=1e-12)


def _add_common(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-timing", action="store_true",
                   help="record 0 for every elapsed-time field so outputs are bit-reproducible")
    p.add_argument("--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="srrr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    _add_gen_flags(p)
    _add_common(p)

    p = sub.add_parser("fit", help="estimate A and B")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--method", choices=METHODS, default="altmin-mm")
    p.add_argument("--time-budget", type=float, default=None, help="seconds")
    p.add_argument("--substeps", action="store_true", help="also record F after each A- and B-step")
    _add_common(p)

    p = sub.add_parser("benchmark", help="compare methods on one dataset")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--methods", default=",".join(METHODS), help="comma-separated list")
    p.add_argument("--time-budget", type=float, required=True, help="seconds per method")
    _add_common(p)

    p = sub.add_parser("montecarlo", help="estimation-accuracy experiment")
    _add_gen_flags(p)
    p.add_argument("--experiment", help="JSON experiment file (overrides the other flags)")
    p.add_argument("--arm", action="append", default=[],
                   help="NAME:PENALTY[:LAMBDA[:THETA]], repeatable")
    p.add_argument("--rank", type=int, default=None, help="fitted rank (default: --r)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--threads", type=int, default=None, help="default: $SRRR_THREADS or CPU count")
    _add_common(p)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    return parser


def _dataset(args):
    if args.data is None and (args.X is None or args.Y is None):
        raise UsageError("give --data, or both --X and --Y")
    d = load_dataset(args.X, args.Y, args.data)
    return d.centered() if args.center else d


def _config(args):
    xi = None
    if args.xi:
        try:
            xi = [float(v) for v in args.xi.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --xi {args.xi!r}") from exc
    pen = Penalty(args.penalty, theta=args.theta if args.penalty == "geman" else None, lam=args.lam)
    return SrrrConfig(rank=args.rank, penalty=pen, xi=xi, tol=args.tol,
                      max_iter=args.max_iter, psi_safeguard=args.psi_safeguard)


def _subgrad_config(args):
    return SubGradConfig(inner_iters=args.inner_iters, step_c=args.step_c, inner_tol=args.inner_tol)


def _timer(args):
    return _zero_clock if args.no_timing else time.perf_counter


def _run_method(method, d, cfg, args, init=None, time_budget=None, substeps=False):
    if method == "altmin-mm":
        return fit(d, cfg, init=init, seed=args.seed, time_budget=time_budget,
                   record_substeps=substeps, timer=_timer(args))
    return fit_subgrad(d, cfg, _subgrad_config(args), seed=args.seed, init=init,
                       time_budget=time_budget, timer=_timer(args))


def cmd_simulate(args, out):
    spec = GenSpec(P=args.P, Q=args.Q, r=args.r, N=args.N, sparse_rows=args.sparse_rows,
                   noise_sigma=args.noise_sigma, seed=args.seed)
    gt = generate(spec)
    write_matrix_csv(out / "X.csv", gt.dataset.X)
    write_matrix_csv(out / "Y.csv", gt.dataset.Y)
    write_json(out / "truth.json", gt.to_dict())
    return ["X.csv", "Y.csv", "truth.json"]


def cmd_fit(args, out):
    d = _dataset(args)
    cfg = _config(args)
    if args.time_budget is not None and not args.time_budget > 0:
        raise UsageError("--time-budget must be > 0")
    res = _run_method(args.method, d, cfg, args, time_budget=args.time_budget, substeps=args.substeps)
    res.metadata["config"] = cfg.to_dict()
    if args.substeps:
        res.metadata["substeps"] = [[k, step, f] for k, step, f in res.substeps]
    write_result_json(out / "result.json", res)
    write_trace_csv(out / "trace.csv", res.trace)
    log.info("%s: %s after %d iterations, F=%.12g", args.method, res.status, res.iters, res.objective)
    return ["result.json", "trace.csv"]


def cmd_benchmark(args, out):
    if not args.time_budget > 0:
        raise UsageError("--time-budget must be > 0")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise UsageError(f"--methods must be a subset of {METHODS}, got {args.methods!r}")
    d = _dataset(args)
    cfg = _config(args)
    init = initialize(d, cfg)
    written = []
    combined = []
    for method in methods:
        res = _run_method(method, d, cfg, args, init=init, time_budget=args.time_budget)
        res.metadata["config"] = cfg.to_dict()
        write_result_json(out / f"result_{method}.json", res)
        write_trace_csv(out / f"trace_{method}.csv", res.trace)
        written += [f"result_{method}.json", f"trace_{method}.csv"]
        combined += [(method, k, f, s) for k, f, s in res.trace]
        log.info("%s: %s after %d iterations, F=%.12g", method, res.status, res.iters, res.objective)
    with open(out / "combined.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "iter", "objective", "seconds"])
        for method, k, f, s in combined:
            w.writerow([method, k, fmt(f), fmt(s)])
    return written + ["combined.csv"]


def parse_arm(text, rank, tol, max_iter):
    parts = text.split(":")
    if not 2 <= len(parts) <= 4:
        raise UsageError(f"bad --arm {text!r}; expected NAME:PENALTY[:LAMBDA[:THETA]]")
    name, kind = parts[0], parts[1]
    try:
        lam = float(parts[2]) if len(parts) > 2 else 1.0
        theta = float(parts[3]) if len(parts) > 3 else (0.05 if kind == "geman" else None)
    except ValueError as exc:
        raise UsageError(f"bad number in --arm {text!r}") from exc
    return Arm(name, SrrrConfig(rank=rank, penalty=Penalty(kind, theta=theta, lam=lam),
                                tol=tol, max_iter=max_iter))


def arms_from_json(items, rank, tol, max_iter):
    arms = []
    for item in items:
        kind = item.get("penalty", "none")
        theta = item.get("theta", 0.05 if kind == "geman" else None)
        cfg = SrrrConfig(
            rank=item.get("rank", rank),
            penalty=Penalty(kind, theta=theta, lam=item.get("lambda", 1.0)),
            xi=item.get("xi"),
            tol=item.get("tol", tol),
            max_iter=item.get("max_iter", max_iter),
        )
        if "name" not in item:
            raise UsageError(f"experiment arm without a name: {item}")
        arms.append(Arm(item["name"], cfg))
    return arms


def cmd_montecarlo(args, out):
    spec_kw = dict(P=args.P, Q=args.Q, r=args.r, N=args.N, sparse_rows=args.sparse_rows,
                   noise_sigma=args.noise_sigma)
    trials, seed = args.trials, args.seed
    arm_items = None
    if args.experiment:
        try:
            exp = read_json(args.experiment)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.experiment}: invalid JSON: {exc}") from exc
        spec_kw.update(exp.get("spec", {}))
        trials = exp.get("trials", trials)
        seed = exp.get("seed", seed)
        arm_items = exp.get("arms")
    spec_kw.pop("seed", None)
    try:
        spec = GenSpec(**spec_kw)
    except TypeError as exc:
        raise UsageError(f"bad experiment spec: {exc}") from exc
    rank = args.rank or spec.r
    if arm_items is not None:
        arms = arms_from_json(arm_items, rank, args.tol, args.max_iter)
    elif args.arm:
        arms = [parse_arm(a, rank, args.tol, args.max_iter) for a in args.arm]
    else:
        raise UsageError("give at least one --arm or an --experiment file")
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")

    rows, summary = monte_carlo(spec, arms, trials, base_seed=seed, threads=args.threads, timer=_timer(args))
    summary["spec"] = spec.to_dict()
    summary["trials"] = trials
    summary["base_seed"] = seed
    summary["design"] = "paired: every arm is fit on the same dataset in each trial"
    summary["arm_configs"] = {a.name: a.cfg.to_dict() for a in arms}

    with open(out / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for r in rows:
            cells = [r["trial"], r["arm"]]
            for c in ("angle", "iters", "seconds", "recall", "precision", "max_angle"):
                v = r.get(c)
                cells.append("" if v is None else v if c == "iters" else fmt(v))
            cells += [r.get("status", ""), r.get("error", "")]
            w.writerow(cells)
    write_json(out / "summary.json", summary)
    return ["trials.csv", "summary.json"]


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "benchmark": cmd_benchmark,
    "montecarlo": cmd_montecarlo,
}


def _params(args):
    return {k: v for k, v in vars(args).items() if k not in ("out",)}


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            manifest = read_json(args.manifest)
            replay_argv = list(manifest["argv"])
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            print(f"{type(exc).__name__}: cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
            return 1
        if "--out" in replay_argv:
            i = replay_argv.index("--out")
            del replay_argv[i:i + 2]
        return run(replay_argv + ["--out", args.out])

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    out = Path(args.out)
    started = _now()
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](args, out)
        write_json(out / "manifest.json", {
            "command": args.command,
            "argv": list(argv),
            "params": _params(args),
            "seed": args.seed,
            "version": __version__,
            "out_dir": str(out),
            "inputs": [v for k, v in vars(args).items() if k in ("X", "Y", "data", "experiment") and v],
            "outputs": files,
            "started": started,
            "finished": _now(),
        })
    except (UsageError, InvalidArgumentError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (SrrrError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else list(argv)))


if __name__ == "__main__":
    main()
