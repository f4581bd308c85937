"""Parameter sweeps over block-model instances, written as resumable CSV.

One row per (grid point, seed, algorithm).  Rows are appended as tasks
finish so an interrupted run keeps its partial results; on completion the
file is rewritten in canonical order, which makes the output independent of
worker count and of how many times the run was resumed.  Wall-clock times
go to a ``<stem>.timing.csv`` sidecar so the main file stays reproducible
byte for byte.  ``<stem>.summary.csv`` holds per-point means and standard
errors.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bp import BpOpts, bp_run
from .cluster import Labeling, overlap
from .eigen import SolverOpts, topk_eigs
from .graph import SbmParams, derive_seed, sbm_sample
from .io import fmt_float
from .operators import build_b_prime
from .pipeline import ALGORITHMS, spectral_cluster

log = logging.getLogger(__name__)

SWEEP_ALGORITHMS = ALGORITHMS + ("bp",)
VARIES = ("gap", "c")

COLUMNS = (
    "vary",
    "value",
    "n",
    "q",
    "c",
    "c_in",
    "c_out",
    "point",
    "seed_index",
    "seed",
    "algorithm",
    "overlap",
    "mu1",
    "mu2",
    "mu3_abs",
    "converged",
)
SUMMARY_COLUMNS = ("vary", "value", "algorithm", "runs", "overlap_mean", "overlap_stderr", "mu1_mean", "mu2_mean", "mu3_abs_mean")
TIMING_COLUMNS = ("point", "seed_index", "algorithm", "wall_time")


@dataclass(frozen=True)
class SweepSpec:
    """``vary="gap"``: grid over c_in - c_out at fixed mean degree ``c``.
    ``vary="c"``: grid over the mean degree at fixed ratio c_out / c_in."""

    vary: str
    grid: tuple
    n: int = 10_000
    q: int = 2
    seeds: int = 20
    c: float = 3.0
    ratio: float = 0.1
    algorithms: tuple = SWEEP_ALGORITHMS
    base_seed: int = 0
    bp_max_sweeps: int = 500

    def __post_init__(self):
        if self.vary not in VARIES:
            raise ValueError(f"vary must be one of {VARIES}")
        object.__setattr__(self, "grid", tuple(float(x) for x in self.grid))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.grid:
            raise ValueError("grid must not be empty")
        if self.seeds < 1:
            raise ValueError("need at least one seed per point")
        bad = [a for a in self.algorithms if a not in SWEEP_ALGORITHMS]
        if bad or not self.algorithms:
            raise ValueError(f"unknown algorithms {bad}; choose from {SWEEP_ALGORITHMS}")

    def params(self, point: int) -> SbmParams:
        x = self.grid[point]
        if self.vary == "gap":
            return SbmParams.from_gap(self.n, self.q, self.c, x)
        return SbmParams.from_ratio(self.n, self.q, x, self.ratio)

    def seed(self, point: int, seed_index: int) -> int:
        return derive_seed(self.base_seed, point, seed_index)


@dataclass
class RunRecord:
    vary: str
    value: float
    n: int
    q: int
    c: float
    c_in: float
    c_out: float
    point: int
    seed_index: int
    seed: int
    algorithm: str
    overlap: float
    mu1: float
    mu2: float
    mu3_abs: float
    converged: bool
    wall_time: float = field(default=0.0, compare=False)

    def row(self) -> list[str]:
        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("1" if v else "0")
            elif isinstance(v, float):
                out.append(fmt_float(v))
            else:
                out.append(str(v))
        return out


def leading_moduli(values: np.ndarray, q: int) -> tuple[float, float, float]:
    """``mu1``, ``mu2`` and ``|mu3|`` from eigenvalues sorted by modulus.

    ``mu2`` is the second eigenvalue when it is real (NaN otherwise);
    ``|mu3|`` is the modulus of the first eigenvalue after the ``q`` expected
    outliers, i.e. the top of the bulk when the groups are detectable.
    """
    vals = np.asarray(values, dtype=complex)
    mu1 = float(vals[0].real)
    second = vals[1] if vals.size > 1 else np.nan
    mu2 = float(second.real) if vals.size > 1 and abs(second.imag) <= 1e-6 * max(1.0, abs(second)) else float("nan")
    mu3 = float(abs(vals[q])) if vals.size > q else float("nan")
    return mu1, mu2, mu3


def run_task(spec: SweepSpec, point: int, seed_index: int) -> list[RunRecord]:
    params = spec.params(point)
    seed = spec.seed(point, seed_index)
    lg = sbm_sample(params, seed)
    truth = Labeling(lg.labels, params.q)
    eig = topk_eigs(build_b_prime(lg.graph).T, SolverOpts(k=spec.q + 1, seed=derive_seed(seed, 7)))
    mu1, mu2, mu3 = leading_moduli(eig.values, spec.q)
    c_in, c_out = params.two_valued
    records = []
    for alg in spec.algorithms:
        t0 = time.perf_counter()
        if alg == "bp":
            res = bp_run(lg.graph, params, BpOpts(max_sweeps=spec.bp_max_sweeps, seed=derive_seed(seed, 11)))
            labeling, ok = res.labeling, res.converged
        elif lg.graph.m == 0:
            labeling, ok = Labeling(np.zeros(params.n, dtype=np.int64), params.q), True
        else:
            res = spectral_cluster(lg.graph, params.q, alg, seed=derive_seed(seed, 13))
            labeling, ok = res.labeling, res.meta["converged"]
        records.append(
            RunRecord(
                spec.vary,
                spec.grid[point],
                spec.n,
                spec.q,
                float(params.mean_degree),
                float(c_in),
                float(c_out),
                point,
                seed_index,
                seed,
                alg,
                float(overlap(truth, labeling)),
                mu1,
                mu2,
                mu3,
                bool(ok),
                time.perf_counter() - t0,
            )
        )
    return records


def _read_done(path: Path) -> dict[tuple[int, int], list[list[str]]]:
    done: dict[tuple[int, int], list[list[str]]] = {}
    if not path.exists():
        return done
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return done
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path} has a different column layout; refusing to resume")
        for row in reader:
            if len(row) != len(COLUMNS):
                continue  # torn final line from an interrupted write
            key = (int(row[COLUMNS.index("point")]), int(row[COLUMNS.index("seed_index")]))
            done.setdefault(key, []).append(row)
    return done


def _task(args):
    spec, point, seed_index = args
    return point, seed_index, run_task(spec, point, seed_index)


def run_sweep(spec: SweepSpec, out_csv, threads: int = 1) -> Path:
    """Run (or resume) a sweep; returns the CSV path."""
    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    done = _read_done(out)
    n_alg = len(spec.algorithms)
    complete = {k: rows for k, rows in done.items() if len(rows) == n_alg}
    todo = [
        (spec, p, s)
        for p in range(len(spec.grid))
        for s in range(spec.seeds)
        if (p, s) not in complete
    ]
    # rewrite the file with only complete tasks so a torn task is redone
    _write_rows(out, [r for k in sorted(complete) for r in complete[k]])
    timing = out.with_name(out.stem + ".timing.csv")
    if not timing.exists():
        with timing.open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow(TIMING_COLUMNS)
    log.info("sweep: %d tasks to run, %d already complete", len(todo), len(complete))

    def collect(records):
        with out.open("a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for r in records:
                w.writerow(r.row())
        with timing.open("a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for r in records:
                w.writerow([r.point, r.seed_index, r.algorithm, fmt_float(r.wall_time)])

    if threads > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for _, _, records in pool.map(_task, todo):
                collect(records)
    else:
        for args in todo:
            collect(_task(args)[2])
    _canonicalize(out, spec)
    write_summary(out, out.with_name(out.stem + ".summary.csv"))
    return out


def _write_rows(path: Path, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)


def _canonicalize(path: Path, spec: SweepSpec) -> None:
    done = _read_done(path)
    order = {a: i for i, a in enumerate(spec.algorithms)}
    alg = COLUMNS.index("algorithm")
    rows = []
    for key in sorted(done):
        rows.extend(sorted(done[key], key=lambda r: order.get(r[alg], len(order))))
    _write_rows(path, rows)


def read_records(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_summary(csv_path, summary_path) -> None:
    rows = read_records(csv_path)
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["vary"], float(r["value"]), r["algorithm"], int(r["point"])), []).append(r)
    with Path(summary_path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for (vary, value, alg, _), rs in sorted(groups.items(), key=lambda kv: (kv[0][3], kv[0][2])):
            ov = np.array([float(r["overlap"]) for r in rs])
            stderr = ov.std(ddof=1) / np.sqrt(ov.size) if ov.size > 1 else float("nan")
            means = [np.nanmean([float(r[k]) for r in rs]) if any(r[k] != "nan" for r in rs) else float("nan") for k in ("mu1", "mu2", "mu3_abs")]
            w.writerow([vary, fmt_float(value), alg, ov.size, fmt_float(ov.mean()), fmt_float(stderr)] + [fmt_float(x) for x in means])


def spec_dict(spec: SweepSpec) -> dict:
    return asdict(spec)
