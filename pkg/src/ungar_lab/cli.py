"""Command-line front end.

Every subcommand is deterministic given its flags and seed (flag
``--seed``, falling back to the ``UNGAR_LAB_SEED`` environment variable,
then 0).  Output is CSV or JSON with floats at 12 significant digits and
'.' decimals.  Exit codes: 0 success, 2 configuration error, 3 cap
exceeded, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import engine, percolation
from .skyline import algorithm1_run, lower_bound_f
from .errors import (
    CapExceeded,
    ConfigError,
    DomainError,
    InvariantViolation,
    UngarLabError,
)
from .poset import FinitePoset, grid_poset
from .rng import replica_random


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _emit(rows: list[dict], args) -> None:
    text_rows = [{k: _fmt(v) for k, v in row.items()} for row in rows]
    if args.format == "json":
        out = json.dumps(text_rows, indent=2, sort_keys=False) + "\n"
    else:
        header = list(rows[0].keys()) if rows else []
        lines = [",".join(header)]
        lines += [",".join(r[k] for k in header) for r in text_rows]
        out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("UNGAR_LAB_SEED", "0"))


def _validate_common(args) -> None:
    if getattr(args, "reps", 1) < 1:
        raise ConfigError("--reps must be at least 1")
    for name in ("cap_states", "cap_chains"):
        if getattr(args, name, 1) < 1:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")


def _lattice(args):
    kind = args.lattice
    if kind == "sn":
        if args.n is None:
            raise ConfigError("--lattice sn requires --n")
        return engine.SnLattice(args.n)
    if kind == "tamari":
        if args.n is None:
            raise ConfigError("--lattice tamari requires --n")
        return engine.TamariForestLattice(args.n)
    if kind == "tamari-av":
        if args.n is None:
            raise ConfigError("--lattice tamari-av requires --n")
        return engine.TamariAvLattice(args.n)
    if kind == "grid":
        if args.rows is None or args.cols is None:
            raise ConfigError("--lattice grid requires --rows and --cols")
        return engine.IdealLattice(
            grid_poset(args.rows, args.cols), name=f"grid-{args.rows}x{args.cols}"
        )
    if kind == "ideal":
        if not args.poset:
            raise ConfigError("--lattice ideal requires --poset FILE")
        with open(args.poset) as fh:
            poset = FinitePoset.from_json(fh.read())
        return engine.IdealLattice(poset, name=f"ideal-file-{poset.n}")
    raise ConfigError(f"unknown lattice {kind!r}")


def _add_common(sub):
    sub.add_argument("--lattice", default="sn",
                     choices=["sn", "tamari", "tamari-av", "grid", "ideal"])
    sub.add_argument("--n", type=int)
    sub.add_argument("--rows", type=int)
    sub.add_argument("--cols", type=int)
    sub.add_argument("--poset", help="JSON poset file for --lattice ideal")
    sub.add_argument("--p", type=float, default=0.5)
    sub.add_argument("--reps", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--out", default=None)
    sub.add_argument("--cap-states", type=int, default=10**6)
    sub.add_argument("--cap-chains", type=int, default=10**6)
    sub.add_argument("--c1", type=float, default=10.0)


def cmd_exact(args) -> None:
    lattice = _lattice(args)
    expect = engine.exact_expected_absorption(lattice, args.p, cap_states=args.cap_states)
    top = lattice.top()
    rows = [
        {
            "backend": lattice.name,
            "p": args.p,
            "states": len(expect),
            "expected_steps": float(expect[top]),
        }
    ]
    if args.per_element:
        rows = [
            {"backend": lattice.name, "p": args.p, "element": repr(s),
             "expected_steps": float(v)}
            for s, v in sorted(expect.items(), key=lambda kv: kv[1])
        ]
    _emit(rows, args)


def cmd_simulate(args) -> None:
    lattice = _lattice(args)
    seed = _seed(args)
    res = engine.monte_carlo_expectation(
        lattice, args.p, reps=args.reps, seed=seed, keep_samples=bool(args.survival)
    )
    row = {
        "backend": lattice.name,
        "n": args.n if args.n is not None else "",
        "p": args.p,
        "seed": seed,
        "reps": res.reps,
        "mean": res.mean,
        "stderr": res.stderr,
        "min": res.minimum,
        "max": res.maximum,
    }
    # linear-growth reporting (informational; asymptotic constants are
    # never asserted at finite n)
    if args.lattice == "sn" and args.n and 0 < args.p < 1:
        row["mean_over_n"] = res.mean / args.n
        row["linear_coefficient"] = percolation.sn_linear_coefficient(args.p)
    if args.lattice in ("tamari", "tamari-av") and args.n and 0 < args.p < 1:
        row["mean_over_n"] = res.mean / args.n
        row["linear_coefficient"] = percolation.tamari_linear_coefficient(args.p)
    if args.survival:
        ts, surv = engine.empirical_survival(res.samples)
        with open(args.survival, "w") as fh:
            fh.write("t,survival\n")
            for tt, ss in zip(ts, surv):
                fh.write(f"{tt},{_fmt(float(ss))}\n")
    if args.trace:
        rnd = replica_random(seed, 0)
        run = engine.run_chain(lattice, args.p, rnd, record_states=True,
                               record_picks=True, seed=seed)
        with open(args.trace, "w") as fh:
            for step, (state, picks) in enumerate(
                zip(run.states[1:], run.picks), start=1
            ):
                fh.write(json.dumps(
                    {"step": step, "state": _stateify(state), "picked": list(picks)}
                ) + "\n")
    _emit([row], args)


def _stateify(state):
    if isinstance(state, tuple):
        return list(state)
    if isinstance(state, int):
        return state
    return json.loads(state.to_json()) if hasattr(state, "to_json") else repr(state)


def cmd_lpp(args) -> None:
    if args.lattice == "grid":
        if args.rows is None or args.cols is None:
            raise ConfigError("lpp on a grid needs --rows/--cols")
        seed = _seed(args)
        samples = percolation.lpp_grid_samples(
            args.rows, args.cols, args.p, args.reps, seed
        )
        name = f"grid-{args.rows}x{args.cols}"
    else:
        if not args.poset:
            raise ConfigError("lpp needs --lattice grid or --poset FILE")
        with open(args.poset) as fh:
            poset = FinitePoset.from_json(fh.read())
        seed = _seed(args)
        rnd = engine.replica_generator(seed, 0)
        samples = np.array(
            [percolation.lpp_sample(poset, args.p, rnd).total for _ in range(args.reps)]
        )
        name = f"poset-{poset.n}"
    _emit(
        [
            {
                "backend": name,
                "p": args.p,
                "seed": _seed(args),
                "reps": args.reps,
                "mean": float(samples.mean()),
                "stderr": float(samples.std(ddof=1) / math.sqrt(len(samples))),
                "min": int(samples.min()),
                "max": int(samples.max()),
            }
        ],
        args,
    )


def cmd_tasep(args) -> None:
    if args.rows is None or args.cols is None:
        raise ConfigError("tasep requires --rows and --cols")
    seed = _seed(args)
    samples = percolation.tasep_absorption_samples(
        args.rows, args.cols, args.p, args.reps, seed
    )
    _emit(
        [
            {
                "rows": args.rows,
                "cols": args.cols,
                "p": args.p,
                "seed": seed,
                "reps": args.reps,
                "mean": float(samples.mean()),
                "stderr": float(samples.std(ddof=1) / math.sqrt(len(samples))),
                "min": int(samples.min()),
                "max": int(samples.max()),
            }
        ],
        args,
    )


def cmd_fluctuation(args) -> None:
    if args.rows is None or args.cols is None:
        raise ConfigError("fluctuation requires --rows and --cols")
    if not 0 < args.p < 1:
        raise ConfigError("fluctuation requires p in (0, 1)")
    seed = _seed(args)
    samples = percolation.lpp_grid_samples(
        args.rows, args.cols, args.p, args.reps, seed
    ).astype(float)
    phi, eta = percolation.rescaling_constants(args.p, args.rows, args.cols)
    rescaled = (samples - phi) / eta
    row = {
        "n": args.rows,
        "m": args.cols,
        "p": args.p,
        "reps": args.reps,
        "mean_T": float(samples.mean()),
        "Phi": phi,
        "eta": eta,
        "mean_rescaled": float(rescaled.mean()),
        "sd_rescaled": float(rescaled.std(ddof=1)),
    }
    if args.tail is not None:
        row["tail_t"] = args.tail
        row["tail_empirical"] = float((rescaled > args.tail).mean())
        row["tail_asymptotic"] = percolation.tracy_widom_tail(args.tail)
    _emit([row], args)


def cmd_skyline(args) -> None:
    if args.n is None:
        raise ConfigError("skyline requires --n")
    seed = _seed(args)
    lines = []
    for r in range(args.reps):
        res = algorithm1_run(args.n, args.p, seed + r)
        lines.append(json.dumps(res.to_jsonable()))
    out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def cmd_zeta(args) -> None:
    if args.n is None:
        raise ConfigError("zeta requires --n (number of geometric variables)")
    if not 0 < args.p < 1:
        raise ConfigError("zeta requires p in (0, 1)")
    seed = _seed(args)
    est, err = percolation.zeta_estimate(args.p, args.n, args.reps, seed)
    ups = percolation.upsilon(args.p, args.n)
    _emit(
        [
            {
                "p": args.p,
                "n": args.n,
                "trials": args.reps,
                "seed": seed,
                "zeta_hat": est,
                "stderr": err,
                "upsilon": ups,
                "abs_diff": abs(est - ups),
                "liminf_lower_bound": percolation.zeta_liminf_lower_bound(args.p),
            }
        ],
        args,
    )


def cmd_bounds(args) -> None:
    what = args.what
    row: dict = {"what": what}
    if what == "f":
        if args.x is None:
            raise ConfigError("bounds --what f requires --x")
        row.update(x=args.x, p=args.p, c1=args.c1,
                   value=lower_bound_f(args.x, args.p, args.c1))
    elif what in ("geom-upper", "geom-lower"):
        if args.k is None or args.t is None:
            raise ConfigError("geometric bounds require --k and --t")
        side = "upper" if what == "geom-upper" else "lower"
        row.update(k=args.k, p=args.p, t=args.t,
                   value=engine.geometric_tail_bound(args.k, args.p, args.t, side))
    elif what == "tw-tail":
        if args.t is None:
            raise ConfigError("tw-tail requires --t")
        row.update(t=args.t, value=percolation.tracy_widom_tail(args.t))
    elif what == "rescale":
        if args.rows is None or args.cols is None:
            raise ConfigError("rescale requires --rows and --cols")
        phi, eta = percolation.rescaling_constants(args.p, args.rows, args.cols)
        row.update(p=args.p, x=args.rows, y=args.cols, Phi=phi, eta=eta)
    elif what == "sn-coefficient":
        row.update(p=args.p, value=percolation.sn_linear_coefficient(args.p))
    elif what == "tamari-coefficient":
        row.update(p=args.p, value=percolation.tamari_linear_coefficient(args.p))
    else:
        raise ConfigError(f"unknown bound {what!r}")
    _emit([row], args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ungar-lab",
        description="Absorbing lattice chains: exact solves, Monte Carlo, "
        "percolation couplings, and skyline diagnostics.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("exact", help="expected absorption time by linear solve")
    _add_common(sp)
    sp.add_argument("--per-element", action="store_true")
    sp.set_defaults(func=cmd_exact)

    sp = subs.add_parser("simulate", help="Monte Carlo absorption statistics")
    _add_common(sp)
    sp.add_argument("--survival", help="write the empirical survival CSV here")
    sp.add_argument("--trace", help="write a one-replica JSONL trace here")
    sp.set_defaults(func=cmd_simulate)

    sp = subs.add_parser("lpp", help="last-passage percolation samples")
    _add_common(sp)
    sp.set_defaults(func=cmd_lpp)

    sp = subs.add_parser("tasep", help="corner-growth window fill times")
    _add_common(sp)
    sp.set_defaults(func=cmd_tasep)

    sp = subs.add_parser("fluctuation", help="rescaled passage-time statistics")
    _add_common(sp)
    sp.add_argument("--tail", type=float, default=None)
    sp.set_defaults(func=cmd_fluctuation)

    sp = subs.add_parser("skyline", help="multi-stream runs with diagnostics")
    _add_common(sp)
    sp.set_defaults(func=cmd_skyline)

    sp = subs.add_parser("zeta", help="uniqueness probability vs its series limit")
    _add_common(sp)
    sp.set_defaults(func=cmd_zeta)

    sp = subs.add_parser("bounds", help="evaluate bound formulas")
    _add_common(sp)
    sp.add_argument("--what", required=True,
                    choices=["f", "geom-upper", "geom-lower", "tw-tail", "rescale",
                             "sn-coefficient", "tamari-coefficient"])
    sp.add_argument("--x", type=float)
    sp.add_argument("--k", type=int)
    sp.add_argument("--t", type=float)
    sp.set_defaults(func=cmd_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        _validate_common(args)
        args.func(args)
    except (ConfigError, DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except UngarLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
