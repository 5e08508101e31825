"""Benchmark harness: seeded ensembles, per-trial CSV and aggregate report.

Trial ``i`` of an experiment with master seed ``S`` uses the matrix seed
``derive_seed(S, i, 0)`` (also the seed ``gen`` uses for file ``i``) and the
random-restart seed ``derive_seed(S, i, 1)``. Aggregates are always computed
from the parsed CSV rows so the report can be re-derived from the CSV alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

import numpy as np

from eigenrelax.core import InvalidInputError, energy
from eigenrelax.dynamics import DynamicsConfig
from eigenrelax.generators import derive_seed, gen_hebb, gen_patterns, gen_uniform
from eigenrelax.solvers import classify, exhaustive_cap, solve_exhaustive, solve_random, solve_spectral
from eigenrelax.spectral import POLICY_TOP, decompose, normalize_policy

SCHEMA_VERSION = "eigenrelax.bench/1"

CSV_COLUMNS = [
    "trial_index", "matrix_seed", "strategy", "best_energy", "oracle_energy",
    "found_global", "win_flag", "sweeps", "flips", "wall_ms",
    "reference_energy", "reached_reference", "best_eigenvector",
]
TIMING_COLUMNS = ("wall_ms",)


class InfeasibleSpecError(InvalidInputError):
    pass


@dataclass(frozen=True)
class StrategySpec:
    kind: str  # "spectral" or "random"
    k: int = 3
    policy: str = "positive"
    m: int | None = None
    restarts: int | None = None  # None -> n

    @property
    def label(self) -> str:
        if self.kind == "random":
            return "random" if self.restarts is None else f"random(restarts={self.restarts})"
        extra = f",m={self.m}" if self.m is not None else ""
        return f"spectral(k={self.k},policy={self.policy}{extra})"

    @classmethod
    def parse(cls, text: str) -> "StrategySpec":
        """Parse ``spectral:k=3,policy=top,m=10`` or ``random:restarts=200``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind not in ("spectral", "random"):
            raise InvalidInputError(f"unknown strategy {kind!r}")
        kwargs = {}
        for item in filter(None, (x.strip() for x in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq or key not in ("k", "policy", "m", "restarts"):
                raise InvalidInputError(f"bad strategy parameter {item!r}")
            kwargs[key] = value if key == "policy" else int(value)
        if "policy" in kwargs:
            kwargs["policy"] = normalize_policy(kwargs["policy"])
        spec = cls(kind, **kwargs)
        if spec.kind == "spectral" and spec.policy == POLICY_TOP and spec.m is None:
            raise InvalidInputError("policy 'top' needs m, e.g. spectral:policy=top,m=10")
        return spec


@dataclass
class ExperimentSpec:
    ensemble: str = "uniform"
    n: int = 15
    bound: float = 4.0
    p: int | None = None
    trials: int = 1
    strategies: list = field(default_factory=lambda: [StrategySpec("spectral"), StrategySpec("random")])
    master_seed: int = 0
    oracle: bool = False
    update_order: str = "sequential"

    def validate(self) -> None:
        if self.ensemble not in ("uniform", "hebb"):
            raise InvalidInputError(f"unknown ensemble {self.ensemble!r}")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if self.n < 2:
            raise InvalidInputError("n must be >= 2")
        if self.ensemble == "hebb" and (self.p is None or self.p < 1):
            raise InvalidInputError("hebb ensemble needs p >= 1")
        if not self.strategies:
            raise InvalidInputError("at least one strategy is required")
        cap = exhaustive_cap()
        if self.oracle and self.n > cap:
            raise InfeasibleSpecError(f"oracle requested for n={self.n} above exhaustive cap {cap}")
        DynamicsConfig(self.update_order)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategies"] = [s.label for s in self.strategies]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        strategies = d.pop("strategies", None)
        spec = cls(**d)
        if strategies is not None:
            spec.strategies = [StrategySpec.parse(_label_to_arg(s)) if isinstance(s, str) else StrategySpec(**s)
                               for s in strategies]
        return spec


def _label_to_arg(label: str) -> str:
    # accept both "spectral:k=3" and the "spectral(k=3)" labels written in reports
    if "(" in label:
        kind, rest = label.split("(", 1)
        return f"{kind}:{rest.rstrip(')')}"
    return label


def matrix_seed(master_seed: int, trial: int) -> int:
    return derive_seed(master_seed, trial, 0)


def build_instance(spec: ExperimentSpec, trial: int):
    """The trial's matrix and, for Hebb ensembles, its patterns."""
    seed = matrix_seed(spec.master_seed, trial)
    if spec.ensemble == "uniform":
        return gen_uniform(spec.n, spec.bound, seed), None
    patterns = gen_patterns(spec.n, spec.p, seed)
    return gen_hebb(patterns), patterns


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_trial(spec: ExperimentSpec, trial: int) -> dict:
    J, patterns = build_instance(spec, trial)
    cfg = DynamicsConfig(spec.update_order, seed=derive_seed(spec.master_seed, trial, 2))
    tol = J.energy_tolerance()
    oracle = solve_exhaustive(J) if spec.oracle else None
    reference = None
    if patterns is not None:
        reference = min(energy(J, xi) for xi in patterns.patterns)

    spectrum = None
    outcomes = []
    for strat in spec.strategies:
        t0 = time.perf_counter()
        if strat.kind == "spectral":
            if spectrum is None:
                spectrum = decompose(J)
            out = solve_spectral(J, strat.k, strat.policy, strat.m, cfg, spectrum=spectrum)
        else:
            out = solve_random(J, strat.restarts, derive_seed(spec.master_seed, trial, 1), cfg)
        outcomes.append((strat, out, 1000.0 * (time.perf_counter() - t0)))

    random_energy = next((o.best_energy for s, o, _ in outcomes if s.kind == "random"), None)
    rows = []
    for strat, out, ms in outcomes:
        row = {
            "trial_index": trial,
            "matrix_seed": matrix_seed(spec.master_seed, trial),
            "strategy": strat.label,
            "best_energy": out.best_energy,
            "oracle_energy": None if oracle is None else oracle.best_energy,
            "found_global": None if oracle is None else int(out.best_energy <= oracle.best_energy + tol),
            "win_flag": None,
            "sweeps": out.sweeps,
            "flips": out.flips,
            "wall_ms": round(ms, 3),
            "reference_energy": reference,
            "reached_reference": None if reference is None else int(out.best_energy <= reference + tol),
            "best_eigenvector": None,
        }
        if strat.kind == "spectral":
            if random_energy is not None:
                row["win_flag"] = classify(out.best_energy, random_energy, tol)
            row["best_eigenvector"] = out.best_result.source[0]
        rows.append(row)
    return {
        "trial_index": trial,
        "matrix_seed": matrix_seed(spec.master_seed, trial),
        "oracle_degeneracy": None if oracle is None else oracle.degeneracy,
        "rows": rows,
    }


def _run_trial_packed(args):
    return run_trial(*args)


def run_trials(spec: ExperimentSpec, jobs: int | None = None) -> list[dict]:
    spec.validate()
    jobs = jobs or int(os.environ.get("JOBS_DEFAULT", "1"))
    work = [(spec, i) for i in range(spec.trials)]
    if jobs <= 1:
        return [run_trial(spec, i) for i in range(spec.trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves trial order regardless of completion order
        return list(pool.map(_run_trial_packed, work, chunksize=max(1, spec.trials // (4 * jobs))))


def trials_to_csv(trials: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for trial in trials:
        for row in trial["rows"]:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


_INT_COLS = {"trial_index", "matrix_seed", "found_global", "sweeps", "flips", "reached_reference", "best_eigenvector"}
_FLOAT_COLS = {"best_energy", "oracle_energy", "wall_ms", "reference_energy"}


def parse_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_COLUMNS:
        raise InvalidInputError(f"unexpected CSV columns {reader.fieldnames}")
    rows = []
    for raw in reader:
        row = {}
        for key, value in raw.items():
            if value == "":
                row[key] = None
            elif key in _INT_COLS:
                row[key] = int(value)
            elif key in _FLOAT_COLS:
                row[key] = float(value)
            else:
                row[key] = value
        rows.append(row)
    return rows


def strip_timing(csv_text: str) -> str:
    """CSV text with the timing columns removed (for determinism checks)."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    keep = [i for i, name in enumerate(rows[0]) if name not in TIMING_COLUMNS]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for r in rows:
        writer.writerow([r[i] for i in keep])
    return buf.getvalue()


_Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, total: int, z: float = _Z95) -> tuple[float, float]:
    if total == 0:
        return (math.nan, math.nan)
    phat = successes / total
    denom = 1.0 + z * z / total
    centre = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def _proportion(successes: int, total: int) -> dict:
    lo, hi = wilson_interval(successes, total)
    return {"successes": successes, "trials": total,
            "value": successes / total if total else None, "ci95": [lo, hi]}


def aggregate(rows: list[dict]) -> dict:
    """Per-strategy aggregates from parsed CSV rows."""
    by_strategy: dict[str, list[dict]] = {}
    for row in rows:
        by_strategy.setdefault(row["strategy"], []).append(row)
    random_by_trial = {r["trial_index"]: r["best_energy"] for r in rows if r["strategy"].startswith("random")}
    out = {}
    for label, group in by_strategy.items():
        total = len(group)
        agg = {
            "trials": total,
            "mean_best_energy": math.fsum(r["best_energy"] for r in group) / total,
            "mean_sweeps": sum(r["sweeps"] for r in group) / total,
            "mean_flips": sum(r["flips"] for r in group) / total,
        }
        oracle_rows = [r for r in group if r["found_global"] is not None]
        if oracle_rows:
            agg["p_global"] = _proportion(sum(r["found_global"] for r in oracle_rows), len(oracle_rows))
        flagged = [r for r in group if r["win_flag"] is not None]
        if flagged:
            counts = {k: sum(r["win_flag"] == k for r in flagged) for k in ("win", "tie", "loss")}
            agg["vs_random"] = {
                "counts": counts,
                "p_win": _proportion(counts["win"], len(flagged)),
                "p_tie": _proportion(counts["tie"], len(flagged)),
                "mean_gap": math.fsum(random_by_trial[r["trial_index"]] - r["best_energy"] for r in flagged)
                / len(flagged),
            }
        ref_rows = [r for r in group if r["reached_reference"] is not None]
        if ref_rows:
            agg["p_reference"] = _proportion(sum(r["reached_reference"] for r in ref_rows), len(ref_rows))
        eig_rows = [r for r in group if r["best_eigenvector"] is not None]
        if eig_rows:
            hist: dict[str, int] = {}
            for r in eig_rows:
                key = str(r["best_eigenvector"])
                hist[key] = hist.get(key, 0) + 1
            agg["best_eigenvector_counts"] = dict(sorted(hist.items(), key=lambda kv: int(kv[0])))
        out[label] = agg
    return out


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    trials: list
    csv_text: str
    aggregates: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec.to_dict(),
            "trials": self.trials,
            "aggregates": self.aggregates,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    def write(self, out_dir) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "trials.csv")
        json_path = os.path.join(out_dir, "report.json")
        with open(csv_path, "w", newline="") as fh:
            fh.write(self.csv_text)
        with open(json_path, "w") as fh:
            fh.write(self.to_json() + "\n")
        return csv_path, json_path


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def run_experiment(spec: ExperimentSpec, jobs: int | None = None) -> ExperimentReport:
    trials = run_trials(spec, jobs)
    csv_text = trials_to_csv(trials)
    return ExperimentReport(spec, trials, csv_text, aggregate(parse_csv(csv_text)))


def verify_report(csv_text: str, report: dict) -> list[str]:
    """Re-derive aggregates from the CSV; return a list of mismatching strategy labels."""
    recomputed = json.loads(json.dumps(aggregate(parse_csv(csv_text)), default=_json_default))
    stored = report.get("aggregates", {})
    labels = sorted(set(recomputed) | set(stored))
    return [label for label in labels if recomputed.get(label) != stored.get(label)]
