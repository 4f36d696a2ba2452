"""Command-line entry point: ``plcbounds <subcommand> ...``.

Validation and usage errors exit with status 1; I/O failures exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bounds import AlphaAssumption, compute_bounds
from .core import normalize_utilities
from .dataio import (
    BoundsReport,
    align_stats,
    emit_bounds_report,
    emit_dag_dot,
    empirical_top_l_stats,
    generate_synthetic,
    parse_rankings_csv,
    ratings_to_rankings,
    read_params_json,
    read_ratings_csv,
    read_stats_csv,
    read_utilities_csv,
    write_stats_csv,
    write_synthetic,
    write_utilities_csv,
)
from .errors import IoError, PlcError
from .plackett_luce import FitConfig, pl_fit, pl_nll_gradient
from .plc import (
    McConfig,
    nonidentifiability_witness,
    plc_prob_binned,
    plc_prob_exact,
    plc_prob_mc,
    total_variation,
)

log = logging.getLogger("plcbounds")


class UsageError(PlcError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write_json(path, payload) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _cmd_fit(args) -> None:
    if (args.ratings is None) == (args.rankings is None):
        raise UsageError("fit: give exactly one of --ratings or --rankings")
    if args.ratings is not None:
        data, tied = ratings_to_rankings(
            read_ratings_csv(args.ratings), k=args.k, tie_policy=args.tie_policy
        )
        if tied:
            log.warning("%d respondents had tied scores (policy %s)", len(tied), args.tie_policy)
    else:
        data = parse_rankings_csv(args.rankings)
    cfg = FitConfig(
        learning_rate=args.learning_rate,
        l2_strength=args.l2,
        grad_sq_tolerance=args.tolerance,
        max_iterations=args.max_iterations,
    )
    u = pl_fit(data, cfg)
    nll, grad = pl_nll_gradient(data, u, cfg.l2_strength)
    shifted = normalize_utilities(u, "min_zero")
    labels = data.labels or tuple(str(i) for i in range(data.n))
    write_utilities_csv(args.out, labels, shifted)
    _write_json(
        str(args.out) + ".meta.json",
        {
            "shift": float(shifted[0] - u[0]),
            "normalization": "min_zero",
            "rankings": len(data),
            "k": data.k,
            "nll": round(nll, 6),
            "grad_sq": float(grad @ grad),
        },
    )


def _cmd_stats(args) -> None:
    seed_labels: Sequence[str] = ()
    if args.utilities is not None:
        seed_labels, _ = read_utilities_csv(args.utilities)
    data = parse_rankings_csv(args.rankings, labels=seed_labels)
    stats = empirical_top_l_stats(data)
    write_stats_csv(args.out, stats, data.labels)


def _cmd_bounds(args) -> None:
    if args.alpha is None:
        raise UsageError("bounds: --alpha is required")
    labels, u = read_utilities_csv(args.utilities)
    if (args.stats is None) == (args.rankings is None):
        raise UsageError("bounds: give exactly one of --stats or --rankings")
    if args.rankings is not None:
        data = parse_rankings_csv(args.rankings, labels=labels)
        stats = align_stats(empirical_top_l_stats(data), labels)
    else:
        stats = read_stats_csv(args.stats, labels, samples=args.samples)
    k = args.k if args.k is not None else stats.k
    alpha = AlphaAssumption(args.alpha, k)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = compute_bounds(stats, u, alpha, conservative_ci=args.conservative_ci)
    for w in caught:
        log.warning("%s", w.message)
    meta = {
        "alpha": args.alpha,
        "k": k,
        "items": len(labels),
        "samples": stats.samples,
        "stats_source": stats.source,
        "conservative_ci": args.conservative_ci,
        "edges": len(result.dag.edges),
    }
    report = BoundsReport.from_result(result, labels, u, meta)
    emit_bounds_report(report, args.out, args.format)
    if args.dot is not None:
        emit_dag_dot(result.dag, labels, args.dot)


def _cmd_prob(args) -> None:
    labels, u, p, k_file = read_params_json(args.params)
    index = {lab: i for i, lab in enumerate(labels)}
    names = [x.strip() for x in args.ranking.split(",") if x.strip()]
    unknown = [x for x in names if x not in index]
    if unknown:
        raise PlcError(f"unknown items {unknown}")
    r = tuple(index[x] for x in names)
    k = args.k or k_file or len(r)
    if args.method == "exact":
        value = plc_prob_exact(r, u, p, k)
    elif args.method == "mc":
        value = plc_prob_mc(r, u, p, k, McConfig(args.epsilon, args.delta, args.seed))
    else:
        value = plc_prob_binned(r, u, p, k, args.epsilon)
    print(f"{value:.12g}")


def _cmd_simulate(args) -> None:
    if args.params is not None:
        labels, u, p, k_file = read_params_json(args.params)
        k = args.k or k_file
        if k is None:
            raise UsageError("simulate: --k is required")
    else:
        if args.n is None or args.k is None:
            raise UsageError("simulate: give --params or both --n and --k")
        rng = np.random.default_rng(args.seed)
        u = rng.normal(size=args.n)
        p = rng.uniform(0.2, 1.0, size=args.n)
        labels = tuple(f"I{i}" for i in range(args.n))
        k = args.k
    data = generate_synthetic(len(labels), k, u, p, args.m, args.seed, labels)
    write_synthetic(args.out, data, u, p, k, args.seed)


def _cmd_witness(args) -> None:
    a, b = nonidentifiability_witness(args.n, args.k, args.g1, args.g2, args.c)
    payload = {
        "n": args.n,
        "k": args.k,
        "c": args.c,
        "params": [
            {"utilities": a.u.tolist(), "probs": a.p.tolist()},
            {"utilities": b.u.tolist(), "probs": b.p.tolist()},
        ],
        "total_variation": total_variation(a, b),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out is None:
        print(text)
    else:
        _write_json(args.out, payload)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="plcbounds", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    f = sub.add_parser("fit", help="fit utilities on rankings with known consideration sets")
    f.add_argument("--ratings", type=Path, help="CSV respondent,item,score")
    f.add_argument("--rankings", type=Path, help="rankings CSV with |consideration sets")
    f.add_argument("--out", type=Path, required=True)
    f.add_argument("--k", type=int, help="truncate rating-derived rankings to k")
    f.add_argument("--tie-policy", default="stable")
    f.add_argument("--learning-rate", type=float, default=0.05)
    f.add_argument("--l2", type=float, default=1e-6)
    f.add_argument("--tolerance", type=float, default=1e-8)
    f.add_argument("--max-iterations", type=int, default=20000)
    f.set_defaults(func=_cmd_fit)

    s = sub.add_parser("stats", help="empirical top-l statistics")
    s.add_argument("--rankings", type=Path, required=True)
    s.add_argument("--utilities", type=Path, help="fix the item universe")
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=_cmd_stats)

    b = sub.add_parser("bounds", help="consideration-probability bounds")
    b.add_argument("--alpha", type=float, help="required; expected consideration-set size is at least alpha * k")
    b.add_argument("--k", type=int)
    b.add_argument("--utilities", type=Path, required=True)
    b.add_argument("--stats", type=Path)
    b.add_argument("--rankings", type=Path)
    b.add_argument("--samples", type=int, help="sample count behind --stats")
    b.add_argument("--conservative-ci", type=float, metavar="LEVEL", help="use Wilson interval ends at this level")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--dot", type=Path)
    b.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("prob", help="probability of a single ranking")
    p.add_argument("--params", type=Path, required=True)
    p.add_argument("--ranking", required=True, help="comma-separated labels, best first")
    p.add_argument("--method", choices=("exact", "mc", "binned"), default="exact")
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_prob)

    m = sub.add_parser("simulate", help="sample synthetic PL+C rankings")
    m.add_argument("--params", type=Path)
    m.add_argument("--n", type=int)
    m.add_argument("--k", type=int)
    m.add_argument("--m", type=int, required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", type=Path, required=True)
    m.set_defaults(func=_cmd_simulate)

    w = sub.add_parser("witness", help="two parameter sets with identical ranking laws")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--k", type=int, required=True)
    w.add_argument("--g1", type=float, default=0.3)
    w.add_argument("--g2", type=float, default=0.6)
    w.add_argument("--c", type=float, default=0.1)
    w.add_argument("--out", type=Path)
    w.set_defaults(func=_cmd_witness)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError(parser.format_usage().strip())
        args.func(args)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PlcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
