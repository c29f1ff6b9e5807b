"""Command-line interface: ``sqht {divergence,simulate,sweep,region,sumrate}``.

Exit codes: 0 success, 2 validation or configuration error, 3 numerical
failure. Errors print one ``error=<Tag> message=<text>`` line to stderr.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .divergences import (
    increment_bound,
    max_relative_entropy,
    measured_relative_entropy,
    quantum_relative_entropy,
)
from .engine import Strategy, build_adaptive_strategy, thresholds_for
from .errors import SqhtError, TauTooLargeError, ValidationError
from .montecarlo import (
    BatchConfig,
    batch_json_dict,
    exponent_sweep,
    monitor_invariants,
    run_batch,
    sweep_csv,
    trajectories_csv,
)
from .optimize import OptimizerOptions
from .regions import (
    adaptive_region,
    nonadaptive_region,
    region_csv,
    sumrate_csv,
    sumrate_sweep,
    supports_csv,
)
from .states import parse_povm, parse_state_pair, povm_to_dict, qubit_family

THREADS_ENV = "SQHT_THREADS"


class UsageError(SqhtError):
    pass


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer") from None


def _load_pair(args):
    if args.family:
        if args.family != "qubit":
            raise UsageError("only --family qubit is supported")
        missing = [k for k in ("r0", "r1", "theta") if getattr(args, k) is None]
        if missing:
            raise UsageError("--family qubit needs " + ", ".join("--" + m for m in missing))
        return qubit_family(args.r0, args.r1, args.theta)
    if not args.states:
        raise UsageError("give a state file or --family qubit")
    return parse_state_pair(Path(args.states).read_text())


def _opts(args, threads):
    return OptimizerOptions(restarts=args.restarts, seed=args.seed, workers=threads)


def _config(args):
    # --threads is left out: it never changes results
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "threads")}


def _emit_json(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_csv(text, path, meta):
    Path(path).write_text(text)
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _meta(args, command):
    return {"version": __version__, "command": command, "seed": args.seed, "config": _config(args)}


# commands -------------------------------------------------------------------------

def cmd_divergence(args):
    threads = _threads(args)
    pair = _load_pair(args)
    opts = _opts(args, threads)
    l = args.block
    if l > 1:
        pair = pair.tensor_power(l)
        opts = opts.scaled(2)
    scale = 1.0 / np.log(2) if args.bits else 1.0
    res01 = measured_relative_entropy(pair, opts)
    res10 = measured_relative_entropy(pair.swapped(), opts)
    values = {
        "d_quantum_01": quantum_relative_entropy(pair),
        "d_quantum_10": quantum_relative_entropy(pair.swapped()),
        "d_measured_01": res01.value,
        "d_measured_10": res10.value,
        "d_max_01": max_relative_entropy(pair.rho0, pair.rho1),
        "d_max_10": max_relative_entropy(pair.rho1, pair.rho0),
        "c": increment_bound(pair).c,
    }
    doc = _meta(args, "divergence")
    doc.update({
        "pair": pair.label,
        "block": l,
        "units": "bits" if args.bits else "nats",
        "values": {k: v * scale for k, v in values.items()},
        "per_copy": {k: v * scale / l for k, v in values.items() if k != "c"},
        "optimal_pvm_01": povm_to_dict(res01.povm),
        "optimal_pvm_10": povm_to_dict(res10.povm),
        "optimizer": {"01": res01.meta.as_dict(), "10": res10.meta.as_dict()},
    })
    _emit_json(doc, args.out)
    return 0


def _povm_source(src, pair, opts, cache):
    if src in ("optimal01", "optimal10"):
        if src not in cache:
            direction = pair if src == "optimal01" else pair.swapped()
            cache[src] = measured_relative_entropy(direction, opts).povm
        return cache[src]
    path = Path(src)
    if not path.exists():
        raise UsageError(f"unknown POVM source {src!r}")
    return parse_povm(path.read_text())


def parse_strategy(spec, pair, opts):
    """``adaptive`` | ``fixed:<src>`` | ``cyclic:<src>[,<src>...]:<r1>[,<r2>...]``.

    ``<src>`` is ``optimal01``, ``optimal10`` or a POVM JSON file.
    """
    cache = {}
    if spec == "adaptive":
        return build_adaptive_strategy(pair, opts)
    kind, _, rest = spec.partition(":")
    if kind == "fixed" and rest:
        return Strategy.fixed(_povm_source(rest, pair, opts, cache), pair)
    if kind == "cyclic" and rest:
        srcs, sep, counts = rest.rpartition(":")
        if not sep:
            raise UsageError("cyclic strategy needs ':<r1>,<r2>,...'")
        try:
            reps = [int(c) for c in counts.split(",")]
        except ValueError:
            raise UsageError(f"bad cyclic counts {counts!r}") from None
        povms = [_povm_source(s, pair, opts, cache) for s in srcs.split(",")]
        if len(povms) != len(reps):
            raise UsageError("one count per cyclic POVM source")
        blocks = [(m.relabel(f"{j}:"), r) for j, (m, r) in enumerate(zip(povms, reps))]
        return Strategy.cyclic(blocks, pair)
    raise UsageError(f"bad strategy spec {spec!r}")


def _tau(args, strategy):
    if args.tau is not None:
        return args.tau
    return args.tau_frac * min(strategy.rates)


def cmd_simulate(args):
    threads = _threads(args)
    pair = _load_pair(args)
    opts = _opts(args, threads)
    strategy = parse_strategy(args.strategy, pair, opts)
    tau = _tau(args, strategy)
    try:
        params = thresholds_for(args.n, tau, *strategy.rates)
    except TauTooLargeError as exc:
        raise TauTooLargeError(f"{exc}; rates R0={strategy.rates[0]:.6g} R1={strategy.rates[1]:.6g}") from None
    record = bool(args.trajectories)
    cfg = BatchConfig(trials=args.trials, seed=args.seed, n=args.n, tau=tau,
                      strategy=args.strategy, record_trajectories=record,
                      hypothesis=args.hypothesis, workers=threads)
    est = run_batch(pair, strategy, params, cfg)
    doc = _meta(args, "simulate")
    doc.update(batch_json_dict(est, cfg, params, pair.label))
    doc["config"] = _config(args)
    doc["batch_config"] = {k: v for k, v in asdict(cfg).items() if k != "workers"}
    doc["rates"] = {"R0": strategy.rates[0], "R1": strategy.rates[1]}
    doc["c"] = increment_bound(pair).c
    if record:
        rows = []
        monitors = {}
        for h, outs in sorted(est.outcomes.items()):
            monitors[str(h)] = monitor_invariants(outs, pair, strategy, params)
            text = trajectories_csv(outs)
            body = text.splitlines()[1:]
            for line in body:
                tid, rest = line.split(",", 1)
                rows.append(f"{h * args.trials + int(tid)},{rest}")
        header = "trial_id,k,povm_index,outcome,z_k,s_k"
        Path(args.trajectories).write_text("\n".join([header, *rows]) + "\n")
        doc["trajectory_monitors"] = monitors
    _emit_json(doc, args.out)
    return 0


def cmd_sweep(args):
    threads = _threads(args)
    pair = _load_pair(args)
    opts = _opts(args, threads)
    strategy = parse_strategy(args.strategy, pair, opts)
    tau = _tau(args, strategy)
    n_values = [int(x) for x in args.n_values.split(",")]
    rows = exponent_sweep(pair, strategy, n_values, tau, args.trials, args.seed, threads)
    meta = _meta(args, "sweep")
    meta["tau"] = tau
    meta["slopes"] = [{"n": r.n, "slope_0": r.slope_0, "slope_1": r.slope_1} for r in rows]
    meta["violations"] = [r.estimate.violations for r in rows]
    _emit_csv(sweep_csv(rows), args.out, meta)
    return 0


def cmd_region(args):
    threads = _threads(args)
    pair = _load_pair(args)
    opts = _opts(args, threads)
    regions = []
    if args.mode in ("adaptive", "both"):
        regions.append(adaptive_region(pair, opts))
    hull = None
    if args.mode in ("nonadaptive", "both"):
        hull = nonadaptive_region(pair, args.angles, opts)
        regions.append(hull)
    meta = _meta(args, "region")
    _emit_csv(region_csv(*regions), args.out, meta)
    if hull is not None and args.supports_out:
        _emit_csv(supports_csv(hull), args.supports_out, meta)
    return 0


def cmd_sumrate(args):
    threads = _threads(args)
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    thetas = np.linspace(args.theta_min, args.theta_max, args.points)
    pts = sumrate_sweep(args.r0, args.r1, thetas, _opts(args, threads))
    _emit_csv(sumrate_csv(pts), args.out, _meta(args, "sumrate"))
    return 0


# parser -----------------------------------------------------------------------------

def _common(p, states=True):
    if states:
        p.add_argument("states", nargs="?", help="state-pair JSON file")
        p.add_argument("--family", choices=["qubit"])
        p.add_argument("--r0", type=float)
        p.add_argument("--r1", type=float)
        p.add_argument("--theta", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker cap (default: ${THREADS_ENV} or 1); never changes results")


def build_parser():
    parser = argparse.ArgumentParser(prog="sqht", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="D, D_M, D_max in both directions")
    _common(p)
    p.add_argument("--block", type=int, default=1, help="tensor power l")
    p.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    p.add_argument("--out")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("simulate", help="batch of sequential tests")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--tau-frac", type=float, default=0.1,
                   help="tau as a fraction of min(R0, R1) when --tau is absent")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--strategy", default="adaptive")
    p.add_argument("--hypothesis", choices=["0", "1", "both"], default="both")
    p.add_argument("--trajectories", help="write per-step CSV here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="exponent sweep over n (CSV)")
    _common(p)
    p.add_argument("--n-values", default="20,40,80")
    p.add_argument("--tau", type=float)
    p.add_argument("--tau-frac", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--strategy", default="adaptive")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("region", help="error-exponent regions (CSV)")
    _common(p)
    p.add_argument("--mode", choices=["adaptive", "nonadaptive", "both"], default="both")
    p.add_argument("--angles", type=int, default=64)
    p.add_argument("--out", default="region.csv")
    p.add_argument("--supports-out", default="supports.csv")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("sumrate", help="f and g(1,1) over a theta grid (CSV)")
    _common(p, states=False)
    p.add_argument("--r0", type=float, default=0.98)
    p.add_argument("--r1", type=float, default=0.98)
    p.add_argument("--theta-min", type=float, default=0.05)
    p.add_argument("--theta-max", type=float, default=1.57)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--out", default="sumrate.csv")
    p.set_defaults(func=cmd_sumrate)
    return parser


def _fail(tag, message, code):
    msg = " ".join(str(message).split())
    sys.stderr.write(f"error={tag} message={msg}\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (np.linalg.LinAlgError, ArithmeticError, RuntimeError) as exc:
        return _fail(type(exc).__name__, exc, 3)
    except (SqhtError, ValueError, OSError) as exc:
        tag = type(exc).__name__
        if isinstance(exc, ValidationError):
            tag = f"{tag}[{exc.invariant}]"
        return _fail(tag, exc, 2)

if __name__ == "__main__":
    sys.exit(main())
