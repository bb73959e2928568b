"""Benchmark harness: M-grid sweeps over repeated simulated trials."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import platform
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dagma import DagmaConfig, dagma
from .dataset import BinaryDataset
from .graph import threshold
from .metrics import evaluate, mixed_to_binary
from .notears import NotearsConfig, notears
from .pc import PcConfig, pc
from .simulate import GroundTruth, TierSpec, generate_ground_truth, sample_dataset

log = logging.getLogger(__name__)

ALGORITHMS = ("pc", "notears", "dagma")
METRICS = ("shd", "precision", "recall", "f1", "runtime_seconds")
FULL_GRID = (500, 1000, 2000, 5000, 10000, 20000, 50000, 100000)
DESK_GRID = (500, 2000, 10000)


@dataclass(frozen=True)
class BenchConfig:
    algorithms: tuple[str, ...] = ALGORITHMS
    m_grid: tuple[int, ...] = DESK_GRID
    trials: int = 10
    base_seed: int = 42
    tier_spec: TierSpec = field(default_factory=TierSpec)
    pc: PcConfig = field(default_factory=PcConfig)
    notears: NotearsConfig = field(default_factory=NotearsConfig)
    dagma: DagmaConfig = field(default_factory=DagmaConfig)
    independent_datasets: bool = False
    include_diagonal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise ValueError(f"unknown or empty algorithm list: {sorted(unknown)}")
        if not self.m_grid or any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])) or self.m_grid[0] < 2:
            raise ValueError("m_grid must be non-empty, strictly increasing and >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "BenchConfig":
        obj = dict(obj)
        if "tier_spec" in obj:
            ts = dict(obj["tier_spec"])
            if "tiers" in ts:
                ts["tiers"] = tuple(tuple(t) for t in ts["tiers"])
            if "weight_range" in ts:
                ts["weight_range"] = tuple(ts["weight_range"])
            obj["tier_spec"] = TierSpec(**ts)
        for key, typ in (("pc", PcConfig), ("notears", NotearsConfig), ("dagma", DagmaConfig)):
            if key in obj:
                obj[key] = typ(**obj[key])
        return cls(**obj)


@dataclass
class EvalRecord:
    algorithm: str
    m: int
    trial: int
    seed: int
    shd: float = float("nan")
    precision: float = float("nan")
    recall: float = float("nan")
    f1: float = float("nan")
    runtime_seconds: float = float("nan")
    converged: bool = True
    flags: list = field(default_factory=list)
    failed: bool = False
    error: str = ""


def trial_seed(cfg: BenchConfig, trial: int) -> int:
    return cfg.base_seed + trial


def _data_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(stream,)).generate_state(1, np.uint64)[0])


def trial_ground_truth(cfg: BenchConfig, trial: int) -> GroundTruth:
    return generate_ground_truth(dataclasses.replace(cfg.tier_spec, seed=trial_seed(cfg, trial)))


def trial_dataset(cfg: BenchConfig, gt: GroundTruth, trial: int, m: int) -> BinaryDataset:
    """Nested by default: every m uses a prefix of the largest draw."""
    seed = trial_seed(cfg, trial)
    if cfg.independent_datasets:
        return sample_dataset(gt, m, _data_seed(seed, 1 + cfg.m_grid.index(m)))
    return sample_dataset(gt, max(cfg.m_grid), _data_seed(seed, 0)).head(m)


def run_algorithm(name: str, data: BinaryDataset, cfg: BenchConfig, truth: GroundTruth):
    """Time the discovery call only; returns (binary graph, runtime, converged, flags)."""
    flags = []
    if name == "pc":
        t0 = time.perf_counter()
        g = pc(data, cfg.pc)
        runtime = time.perf_counter() - t0
        learned, info = mixed_to_binary(g, truth.graph)
        if info["arbitrary"]:
            flags.append(f"arbitrary_orientations={info['arbitrary']}")
        return learned, runtime, True, flags
    solver, sub = (notears, cfg.notears) if name == "notears" else (dagma, cfg.dagma)
    t0 = time.perf_counter()
    res = solver(data, sub)
    runtime = time.perf_counter() - t0
    if not res.converged:
        flags.append("not_converged")
    return threshold(res.adjacency, sub.omega), runtime, res.converged, flags


def run_cell(cfg: BenchConfig, trial: int, m: int, algorithm: str) -> EvalRecord:
    rec = EvalRecord(algorithm, m, trial, trial_seed(cfg, trial))
    try:
        gt = trial_ground_truth(cfg, trial)
        data = trial_dataset(cfg, gt, trial, m)
        learned, runtime, converged, flags = run_algorithm(algorithm, data, cfg, gt)
        scores = evaluate(learned, gt.graph, cfg.include_diagonal)
    except Exception as exc:  # a failing cell must not abort the sweep
        log.exception("cell %s m=%d trial=%d failed", algorithm, m, trial)
        rec.failed, rec.error = True, f"{type(exc).__name__}: {exc}"
        return rec
    rec.shd = float(scores["shd"])
    rec.precision, rec.recall, rec.f1 = scores["precision"], scores["recall"], scores["f1"]
    rec.runtime_seconds = max(runtime, 1e-9)
    rec.converged = converged
    rec.flags = flags + [f"{name}_undefined" for name in scores["undefined"]]
    return rec


def _run_cell_args(args):
    return run_cell(*args)


def run_benchmark(cfg: BenchConfig, jobs: int = 1, progress=None) -> list[EvalRecord]:
    cells = [(cfg, t, m, a) for t in range(cfg.trials) for m in cfg.m_grid for a in cfg.algorithms]
    if jobs <= 1:
        records = []
        for cell in cells:
            records.append(run_cell(*cell))
            if progress:
                progress(records[-1])
        return records
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        records = []
        for rec in pool.map(_run_cell_args, cells):
            records.append(rec)
            if progress:
                progress(rec)
    return records


def aggregate(records) -> list[dict]:
    """Mean and sample standard deviation per (algorithm, m, metric)."""
    groups: dict[tuple[str, int], list[EvalRecord]] = {}
    for r in records:
        if not r.failed:
            groups.setdefault((r.algorithm, r.m), []).append(r)
    rows = []
    order = {a: i for i, a in enumerate(ALGORITHMS)}
    for (algo, m), recs in sorted(groups.items(), key=lambda kv: (order.get(kv[0][0], 99), kv[0][1])):
        for metric in METRICS:
            vals = [float(getattr(r, metric)) for r in recs]
            single = len(vals) == 1
            rows.append({
                "algorithm": algo,
                "m": m,
                "metric": metric,
                "mean": statistics.fmean(vals),
                "std": 0.0 if single else statistics.stdev(vals),
                "n": len(vals),
                "flag": "single_trial" if single else "",
            })
    return rows


def lookup(rows, algorithm: str, m: int, metric: str) -> dict:
    for row in rows:
        if row["algorithm"] == algorithm and row["m"] == m and row["metric"] == metric:
            return row
    raise KeyError((algorithm, m, metric))


def hardware_info() -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


RECORD_FIELDS = ("algorithm", "m", "trial", "seed", "shd", "precision", "recall", "f1",
                 "runtime_seconds", "converged", "failed", "flags", "error")


def write_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in records:
            row = dataclasses.asdict(r)
            row["flags"] = ";".join(r.flags)
            w.writerow([row[k] for k in RECORD_FIELDS])


def read_records(path) -> list[EvalRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(EvalRecord(
                algorithm=row["algorithm"], m=int(row["m"]), trial=int(row["trial"]), seed=int(row["seed"]),
                shd=float(row["shd"]), precision=float(row["precision"]), recall=float(row["recall"]),
                f1=float(row["f1"]), runtime_seconds=float(row["runtime_seconds"]),
                converged=row["converged"] == "True", failed=row["failed"] == "True",
                flags=[f for f in row["flags"].split(";") if f], error=row["error"],
            ))
    return out


def _markdown(rows, metric: str, algorithms) -> str:
    ms = sorted({r["m"] for r in rows})
    lines = [f"### {metric}", "", "| m | " + " | ".join(algorithms) + " |",
             "|---|" + "---|" * len(algorithms)]
    for m in ms:
        cells = []
        for a in algorithms:
            try:
                row = lookup(rows, a, m, metric)
                cells.append(f"{row['mean']:.3g} ± {row['std']:.2g}")
            except KeyError:
                cells.append("n/a")
        lines.append(f"| {m} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def emit_report(records, out_dir, cfg: BenchConfig | None = None, markdown: bool = True) -> dict:
    """Writes records.csv, aggregates.csv, long.csv, report.json and report.md."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = aggregate(records)
    write_records(out / "records.csv", records)
    with open(out / "aggregates.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("algorithm", "m", "metric", "mean", "std"))
        for r in rows:
            w.writerow((r["algorithm"], r["m"], r["metric"], repr(r["mean"]), repr(r["std"])))
    with open(out / "long.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("algorithm", "m", "trial", "metric", "value"))
        for r in records:
            if r.failed:
                continue
            for metric in METRICS:
                w.writerow((r.algorithm, r.m, r.trial, metric, repr(float(getattr(r, metric)))))
    failures = [{"algorithm": r.algorithm, "m": r.m, "trial": r.trial, "error": r.error}
                for r in records if r.failed]
    report = {
        "hardware": hardware_info(),
        "config": cfg.to_json() if cfg else None,
        "n_records": len(records),
        "n_failed": len(failures),
        "failures": failures,
        "single_trial_cells": sorted({(r["algorithm"], r["m"]) for r in rows if r["flag"]}),
    }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, default=str)
    if markdown:
        algos = [a for a in ALGORITHMS if any(r["algorithm"] == a for r in rows)]
        text = "# Benchmark\n\n" + "\n".join(_markdown(rows, m, algos) for m in METRICS)
        (out / "report.md").write_text(text)
    return report
