"""Command-line interface: gen, solve, spectrum, bench, verify.

Exit codes: 0 success, 1 usage, 2 input parse, 3 infeasible request,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from eigenrelax.bench import (
    ExperimentSpec,
    InfeasibleSpecError,
    StrategySpec,
    run_experiment,
    verify_report,
)
from eigenrelax.core import ConnectionMatrix, InvalidInputError, RawMatrix, embed_linear_term, energy, symmetrize
from eigenrelax.dynamics import ConvergenceError, DynamicsConfig
from eigenrelax.fileio import FormatError, format_patterns, parse_matrix, read_vector, write_matrix
from eigenrelax.generators import derive_seed, gen_hebb, gen_patterns, gen_uniform
from eigenrelax.solvers import ExhaustiveCapError, solve_exhaustive, solve_random, solve_spectral
from eigenrelax.spectral import SpectralError, build_start_set, decompose, lower_bound

SCHEMA_VERSION = "eigenrelax.solve/1"

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_matrix_file(path: str, raw: bool):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(str(exc), path=path) from None
    try:
        matrix = parse_matrix(text, force_raw=raw)
    except FormatError as exc:
        raise FormatError(exc.message, exc.lineno, path) from None
    if isinstance(matrix, RawMatrix):
        if not raw:
            raise FormatError("raw matrix given; pass --raw to symmetrize it", 1, path)
        matrix = symmetrize(matrix)
    return matrix


def cmd_gen(args) -> int:
    if args.ensemble == "hebb" and args.p is None:
        raise UsageError("--p is required for --ensemble hebb")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = derive_seed(args.seed, i, 0)
        if args.ensemble == "uniform":
            path = out_dir / f"uniform_n{args.n}_{i:04d}.txt"
            write_matrix(path, gen_uniform(args.n, args.bound, seed))
        else:
            patterns = gen_patterns(args.n, args.p, seed)
            path = out_dir / f"hebb_n{args.n}_p{args.p}_{i:04d}.txt"
            write_matrix(path, gen_hebb(patterns))
            path.with_suffix(".patterns").write_text(format_patterns(patterns.patterns))
        print(path)
    return EXIT_OK


def _dynamics_config(args) -> DynamicsConfig:
    return DynamicsConfig(args.order, max_sweeps=args.max_sweeps, seed=args.seed)


def cmd_solve(args) -> int:
    J = _read_matrix_file(args.matrix, args.raw)
    offset = J.energy_offset
    n_problem = J.n
    h = None
    if args.linear:
        h = read_vector(args.linear)
        J = embed_linear_term(ConnectionMatrix(J.entries), h)
    cfg = _dynamics_config(args)
    if args.strategy == "spectral":
        outcome = solve_spectral(J, args.k, args.policy, args.m, cfg)
    elif args.strategy == "random":
        outcome = solve_random(J, args.restarts, args.seed, cfg)
    else:
        outcome = solve_exhaustive(J)

    result = outcome.to_dict(include_results=args.verbose)
    state = np.array(outcome.best_state)
    if h is not None:
        if state[-1] < 0:
            state = -state  # even functional: normalize fictitious spin to +1
        state = state[:n_problem]
        result["problem_state"] = [int(x) for x in state]
        result["fictitious_spin"] = "normalized to +1"
    doc = {
        "schema_version": SCHEMA_VERSION,
        "input": {"path": args.matrix, "n": n_problem, "raw": args.raw, "linear": args.linear},
        "outcome": result,
        "energy_offset": offset,
        "absolute_energy": outcome.best_energy + offset,
    }
    if args.check_oracle:
        oracle = outcome if args.strategy == "exhaustive" else solve_exhaustive(J)
        doc["oracle_energy"] = oracle.best_energy
        doc["oracle_degeneracy"] = oracle.degeneracy
        doc["found_global"] = bool(outcome.best_energy <= oracle.best_energy + J.energy_tolerance())
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    J = _read_matrix_file(args.matrix, args.raw)
    spec = decompose(J)
    doc = {
        "n": J.n,
        "eigenvalues": [float(x) for x in spec.eigenvalues],
        "lower_bound": lower_bound(spec),
        "positive_count": spec.positive_count,
        "eigenvalue_sum": float(np.sum(spec.eigenvalues)),
        "max_residual": spec.max_residual,
    }
    if args.closest:
        doc["start_set"] = build_start_set(spec, args.closest, args.policy, args.m).to_dict()
    if args.json:
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print("eigenvalues: " + " ".join(f"{x:.10g}" for x in doc["eigenvalues"]))
    print(f"lower bound: {doc['lower_bound']:.10g}")
    print(f"positive eigenvalues: {doc['positive_count']}")
    print(f"eigenvalue sum (trace check): {doc['eigenvalue_sum']:.3e}")
    if args.closest:
        for s, src in zip(doc["start_set"]["starts"], doc["start_set"]["sources"]):
            spins = "".join("+" if x > 0 else "-" for x in s)
            print(f"f{src['eigenvector'] + 1} rank {src['rank'] + 1}: {spins}")
        if doc["start_set"]["warning"]:
            print(f"warning: {doc['start_set']['warning']}")
    return EXIT_OK


def _experiment_from_args(args) -> ExperimentSpec:
    if args.config:
        try:
            spec = ExperimentSpec.from_dict(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise FormatError(f"bad experiment config: {exc}", path=args.config) from None
        return spec
    if args.n is None:
        raise UsageError("--n is required (or pass --config)")
    strategies = [StrategySpec.parse(s) for s in args.strategy] if args.strategy else None
    spec = ExperimentSpec(
        ensemble=args.ensemble, n=args.n, bound=args.bound, p=args.p, trials=args.trials,
        master_seed=args.seed, oracle=args.oracle, update_order=args.order,
    )
    if strategies:
        spec.strategies = strategies
    return spec


def cmd_bench(args) -> int:
    spec = _experiment_from_args(args)
    spec.validate()
    report = run_experiment(spec, args.jobs)
    csv_path, json_path = report.write(args.out_dir)
    for label, agg in report.aggregates.items():
        parts = [f"{label}: mean E {agg['mean_best_energy']:.4f}"]
        if "p_global" in agg:
            pg = agg["p_global"]
            parts.append(f"P_global {pg['value']:.3f} [{pg['ci95'][0]:.3f}, {pg['ci95'][1]:.3f}]")
        if "vs_random" in agg:
            pw = agg["vs_random"]["p_win"]
            parts.append(f"P_win {pw['value']:.3f} [{pw['ci95'][0]:.3f}, {pw['ci95'][1]:.3f}]")
            parts.append(f"ties {agg['vs_random']['counts']['tie']}")
        if "p_reference" in agg:
            parts.append(f"P_reference {agg['p_reference']['value']:.3f}")
        print("  ".join(parts))
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    csv_text = Path(args.csv).read_text()
    report = json.loads(Path(args.report).read_text())
    mismatches = verify_report(csv_text, report)
    if mismatches:
        for label in mismatches:
            print(f"MISMATCH {label}")
        return EXIT_INTERNAL
    print("aggregates match the per-trial CSV")
    return EXIT_OK


def _add_dynamics_flags(p):
    p.add_argument("--order", choices=["sequential", "random-permutation"], default="sequential")
    p.add_argument("--max-sweeps", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eigenrelax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write seeded random matrices")
    p.add_argument("--ensemble", choices=["uniform", "hebb"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bound", type=float, default=4.0)
    p.add_argument("--p", type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run one strategy on a matrix file")
    p.add_argument("matrix")
    p.add_argument("--strategy", choices=["spectral", "random", "exhaustive"], default="spectral")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--policy", default="positive", help="positive | top | largest (or a | b | c)")
    p.add_argument("--m", type=int, help="eigenvector count for policy 'top'")
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raw", action="store_true", help="accept and symmetrize a nonsymmetric matrix")
    p.add_argument("--linear", help="file with a linear term h to embed")
    p.add_argument("--check-oracle", action="store_true", help="also run exhaustive search and flag the result")
    p.add_argument("--verbose", action="store_true", help="include every relaxation in the output")
    _add_dynamics_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectrum", help="eigenvalues, lower bound and start vectors")
    p.add_argument("matrix")
    p.add_argument("--raw", action="store_true")
    p.add_argument("--closest", type=int, default=0, metavar="K")
    p.add_argument("--policy", default="positive")
    p.add_argument("--m", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bench", help="run a seeded benchmark experiment")
    p.add_argument("--config", help="JSON experiment spec (overrides other flags)")
    p.add_argument("--ensemble", choices=["uniform", "hebb"], default="uniform")
    p.add_argument("--n", type=int)
    p.add_argument("--bound", type=float, default=4.0)
    p.add_argument("--p", type=int)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--strategy", action="append",
                   help="repeatable: 'spectral:k=3,policy=positive', 'random:restarts=100'")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--order", choices=["sequential", "random-permutation"], default="sequential")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="re-derive report aggregates from the per-trial CSV")
    p.add_argument("csv")
    p.add_argument("report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"eigenrelax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleSpecError, ExhaustiveCapError) as exc:
        print(f"eigenrelax: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SpectralError, ConvergenceError, AssertionError) as exc:
        print(f"eigenrelax: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvalidInputError, OSError) as exc:
        print(f"eigenrelax: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
