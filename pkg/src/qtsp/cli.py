"""Command-line front end.

Every subcommand prints a report (JSON by default, CSV where a table is the
natural output) that embeds its fully resolved configuration. Randomness
comes from numpy's PCG64 generator seeded with ``--seed`` (default 0).

Exit codes: 0 success, 1 usage error, 2 malformed input file, 3 size limit
exceeded, 4 search failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import distsim, geometry, oracle, permcode, solver, wavesim
from .errors import (
    InstanceFormatError,
    InvalidCodeError,
    InvalidPermutationError,
    OutOfRangeError,
    QTSPError,
    SearchFailureError,
    SizeLimitError,
    UsageError,
)

DEFAULT_SEED = 0

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_SIZE = 3
EXIT_SEARCH = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _rng(args) -> np.random.Generator:
    return np.random.default_rng(args.seed)


def _instance(args) -> geometry.NormalizedInstance:
    if args.instance is None:
        raise UsageError("--instance is required")
    path = Path(args.instance)
    if not path.exists():
        raise InstanceFormatError(f"{path}: no such file")
    return geometry.normalize(geometry.load_instance(path))


def _instance_meta(inst: geometry.NormalizedInstance) -> dict:
    return {"name": inst.name, "n": inst.n, "scale": inst.scale, "offset": list(inst.offset)}


# -- subcommands ------------------------------------------------------------

def cmd_gen(args):
    inst = geometry.generate(args.kind, args.n, args.seed)
    if args.name:
        inst = geometry.EuclideanInstance(points=inst.points, name=args.name)
    return {**inst.to_json(), "config": _config(args)}


def cmd_encode(args):
    perm = permcode.check_perm(permcode.parse_seq(args.perm))
    code = permcode.encode(perm)
    return {"config": _config(args), "permutation": permcode.format_seq(perm),
            "code": permcode.format_seq(code), "rank": permcode.rank(code)}


def cmd_decode(args):
    code = permcode.check_code(permcode.parse_seq(args.code))
    perm = permcode.decode(code)
    return {"config": _config(args), "code": permcode.format_seq(code),
            "permutation": permcode.format_seq(perm), "rank": permcode.rank(code),
            "registers": wavesim.render_registers(code)}


def _wave(args):
    if args.alpha is None:
        n = args.n if args.instance is None else _instance(args).n
        if n is None:
            raise UsageError("give --n or --instance for a uniform wave")
        return wavesim.prepare_uniform(n, limit=args.limit), None
    inst = _instance(args)
    return wavesim.prepare_weighted(inst, args.alpha, limit=args.limit), inst


def cmd_wave(args):
    state, inst = _wave(args)
    probs = state.probabilities
    if args.format == "csv":
        return wavesim.dump_csv(probs, state.n)
    report = {"config": _config(args), "n": state.n, "norm": state.norm(),
              "rows": [{"rank": r, "code": permcode.format_seq(permcode.unrank(r, state.n)),
                        "probability": float(p)} for r, p in enumerate(probs)]}
    if inst is not None:
        table = distsim.boltzmann_exact(distsim.enumerate_lengths(inst, args.limit), args.alpha)
        report["tv_to_boltzmann"] = distsim.tv_distance(probs, table)
        report["instance"] = _instance_meta(inst)
    return report


def cmd_sample(args):
    state, inst = _wave(args)
    ranks = wavesim.measure_many(state, args.shots, _rng(args))
    counts = np.bincount(ranks, minlength=len(state))
    rows = [{"rank": r, "code": permcode.format_seq(permcode.unrank(r, state.n)),
             "probability": float(state.probabilities[r]), "count": int(c)}
            for r, c in enumerate(counts) if c or args.all_codes]
    if args.format == "csv":
        lines = ["rank,code,probability,count"]
        lines += [f'{row["rank"]},"{row["code"]}",{row["probability"]!r},{row["count"]}' for row in rows]
        return "\n".join(lines) + "\n"
    report = {"config": _config(args), "shots": args.shots, "rows": rows}
    if inst is not None:
        lengths = distsim.enumerate_lengths(inst, args.limit).lengths[ranks]
        report["best_length"] = float(lengths.min())
        report["mean_length"] = float(lengths.mean())
    return report


def cmd_dist(args):
    inst = _instance(args)
    dist = distsim.enumerate_lengths(inst, args.limit)
    rows = distsim.histogram(dist, args.bins)
    if args.format == "csv":
        return distsim.histogram_csv(rows)
    lo, hi = geometry.length_bounds(inst.n)
    return {"config": _config(args), "instance": _instance_meta(inst),
            "x_min": dist.x_min, "x_max": dist.x_max, "count": len(dist.lengths),
            "bounds": [lo, hi], "within_bounds": dist.within_bounds(),
            "histogram": [{"bin_lo": a, "bin_hi": b, "count": c} for a, b, c in rows]}


def cmd_fit(args):
    inst = _instance(args)
    dist = distsim.enumerate_lengths(inst, args.limit)
    fit = distsim.gaussian_fit(dist.lengths)
    p_n, q_n = distsim.default_pq(fit, dist.x_min, dist.x_max)
    alpha = args.alpha
    if alpha is None:
        alpha = math.exp(max((fit.mu - dist.x_min) / fit.sigma ** 2, 1e-12))
    x, a, b = distsim.to_h_coordinates(fit, alpha, dist.x_min, dist.x_max, args.epsilon)
    return {
        "config": _config(args),
        "instance": _instance_meta(inst),
        "fit": {"mu": fit.mu, "sigma": fit.sigma, "sample_count": fit.sample_count},
        "x_min": dist.x_min, "x_max": dist.x_max,
        "alpha": alpha,
        "p_n": p_n, "q_n": q_n,
        "sigma_ratio_exact": distsim.sigma_ratio(dist, alpha, args.epsilon, mode="exact"),
        "sigma_ratio_gaussian": distsim.sigma_ratio(dist, alpha, args.epsilon, mode="gaussian"),
        "h": {"x": x, "eps_xmin": a, "range_width": b,
              "value": distsim.h_function(x, a, b) if a > 0 else None},
        "center_sensitivity": _center_sensitivity(fit, alpha, args.epsilon, dist.x_min, dist.x_max),
    }


def _center_sensitivity(fit, alpha, epsilon, x_min, x_max) -> dict:
    """Gaussian sigma ratio with the fitted mean moved by half a standard deviation."""
    out = {}
    for label, shift in (("mu_minus_half_sigma", -0.5), ("mu", 0.0), ("mu_plus_half_sigma", 0.5)):
        moved = distsim.GaussianFit(fit.mu + shift * fit.sigma, fit.sigma, fit.sample_count)
        out[label] = distsim.sigma_ratio(moved, alpha, epsilon, x_min=x_min, x_max=x_max)
    return out


def cmd_oracle(args):
    m, N = args.m, args.n_total
    if args.instance is not None:
        if args.lo is None or args.hi is None:
            raise UsageError("--lo and --hi are required with --instance")
        inst = _instance(args)
        q = oracle.RangeQuery(args.lo, args.hi, args.delta)
        m, N = oracle.count_in_range(distsim.enumerate_lengths(inst, args.limit), q, args.policy)
    if m is None or N is None:
        raise UsageError("give --m and --n-total, or --instance with --lo/--hi")
    row = oracle.experiment(m, N, args.trials, _rng(args))
    if args.format == "csv":
        return oracle.report_csv([row])
    return {"config": _config(args), **row, "gap": 0.5 - row["formula_p"]}


def cmd_solve_gaussian(args):
    inst = _instance(args)
    result = solver.solve_gaussian(inst, args.epsilon, _rng(args), alpha=args.alpha,
                                   repetitions=args.repetitions, pilot=args.pilot,
                                   limit=args.limit)
    return _solve_report(args, inst, result)


def cmd_solve_oracle(args):
    inst = _instance(args)
    result = solver.solve_oracle(inst, args.epsilon, _rng(args), mode=args.mode,
                                 trials=args.trials, policy=args.policy, limit=args.limit)
    report = _solve_report(args, inst, result)
    report["i_0"] = result.details["i_0"]
    return report


def _solve_report(args, inst, result):
    if args.baseline and inst.n <= solver.HELD_KARP_LIMIT:
        result.with_baseline(solver.held_karp(inst)[0])
    return {"config": _config(args), "instance": _instance_meta(inst),
            **result.to_json(seed=args.seed)}


def cmd_exact(args):
    inst = _instance(args)
    report = {"config": _config(args), "instance": _instance_meta(inst)}
    if args.method in ("held-karp", "both"):
        length, tour = solver.held_karp(inst)
        report["held_karp"] = {"length": length, "tour": list(tour)}
    if args.method in ("brute-force", "both"):
        length, tour = solver.brute_force(inst, args.limit)
        report["brute_force"] = {"length": length, "tour": list(tour)}
    return report


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qtsp", description="Insertion-code TSP wave and oracle laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, instance=False, seed=False):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", default=None, help="write the report here instead of stdout")
        sp.add_argument("--limit", type=int, default=permcode.ENUMERATION_LIMIT,
                        help="enumeration size limit")
        if instance:
            sp.add_argument("--instance", default=None, help="instance JSON or TSPLIB EUC_2D file")
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = sub.add_parser("gen", help="generate an instance")
    sp.add_argument("--kind", choices=geometry.GENERATOR_KINDS, default="uniform")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--name", default=None)
    common(sp, seed=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("encode", help="permutation -> insertion code")
    sp.add_argument("--perm", required=True, help='e.g. "2,3,1"')
    common(sp)
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("decode", help="insertion code -> permutation")
    sp.add_argument("--code", required=True, help='e.g. "1,1,2"')
    common(sp)
    sp.set_defaults(func=cmd_decode)

    for name, func, help_ in (("wave", cmd_wave, "prepare a wave and dump it"),
                              ("sample", cmd_sample, "measure a wave repeatedly")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--n", type=int, default=None, help="size of a uniform wave")
        sp.add_argument("--alpha", type=float, default=None, help="tilt base; omit for uniform")
        common(sp, instance=True, seed=True)
        if name == "sample":
            sp.add_argument("--shots", type=int, default=1000)
            sp.add_argument("--all-codes", action="store_true", help="list codes never observed too")
        sp.set_defaults(func=func)

    sp = sub.add_parser("dist", help="exact tour-length distribution and histogram")
    sp.add_argument("--bins", type=int, default=20)
    common(sp, instance=True)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("fit", help="Gaussian fit with sigma-ratio and h reports")
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--epsilon", type=float, default=0.1)
    common(sp, instance=True)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("oracle", help="both-zero formula against simulated runs")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--n-total", type=int, default=None)
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--lo", type=float, default=None)
    sp.add_argument("--hi", type=float, default=None)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--policy", choices=oracle.POLICIES, default="strict")
    common(sp, instance=True, seed=True)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("solve-gaussian", help="tilted-wave sampling solver")
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--repetitions", type=int, default=None)
    sp.add_argument("--pilot", type=int, default=solver.PILOT_SIZE)
    sp.add_argument("--no-baseline", dest="baseline", action="store_false")
    common(sp, instance=True, seed=True)
    sp.set_defaults(func=cmd_solve_gaussian)

    sp = sub.add_parser("solve-oracle", help="oracle range search with projection")
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    sp.add_argument("--trials", type=int, default=1001)
    sp.add_argument("--policy", choices=oracle.POLICIES, default="strict")
    sp.add_argument("--no-baseline", dest="baseline", action="store_false")
    common(sp, instance=True, seed=True)
    sp.set_defaults(func=cmd_solve_oracle)

    sp = sub.add_parser("exact", help="exact optimum by Held-Karp and/or enumeration")
    sp.add_argument("--method", choices=("held-karp", "brute-force", "both"), default="both")
    common(sp, instance=True)
    sp.set_defaults(func=cmd_exact)
    return p


def _emit(report, args) -> None:
    if isinstance(report, str):
        text = report
    else:
        if args.format == "csv":
            raise UsageError(f"{args.command} has no CSV output; use --format json")
        text = json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _emit(args.func(args), args)
    except (UsageError, OutOfRangeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, InvalidCodeError, InvalidPermutationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SizeLimitError as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except SearchFailureError as exc:
        print(f"search failure: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except QTSPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
