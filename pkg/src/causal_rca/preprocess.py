"""Relational vehicle / sub-operation data to a binary attribute table.

Pipeline: match sub-operations to each vehicle, aggregate ergonomics (mean)
and plan time (sum), bin both aggregates into equal-width intervals, one-hot
encode vehicle properties, and finally drop properties whose phi
correlation with every interval column stays below a cutoff.
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dataset import BinaryDataset

log = logging.getLogger(__name__)


class AggregationError(ValueError):
    pass


class UndefinedCorrelation(ValueError):
    """phi is undefined when either column is constant."""


@dataclass(frozen=True)
class VehicleRecord:
    properties: frozenset
    fault: bool
    vehicle_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "properties", frozenset(self.properties))
        if not self.properties:
            raise ValueError(f"vehicle {self.vehicle_id!r} has no properties")


@dataclass(frozen=True)
class SubOpRecord:
    properties: frozenset
    ergonomics: float
    plan_time: float
    subop_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "properties", frozenset(self.properties))
        if not self.ergonomics > 0 or not self.plan_time > 0:
            raise ValueError(f"sub-operation {self.subop_id!r}: ergonomics and plan time must be positive")


def match_subops(vehicle: VehicleRecord, subops: Iterable[SubOpRecord]) -> list[SubOpRecord]:
    """Sub-operations whose property set is contained in the vehicle's."""
    return [op for op in subops if op.properties <= vehicle.properties]


def aggregate_ergonomics(matched: Sequence[SubOpRecord]) -> float:
    if not matched:
        raise AggregationError("no matched sub-operations to average")
    return math.fsum(op.ergonomics for op in matched) / len(matched)


def aggregate_plan_time(matched: Sequence[SubOpRecord]) -> float:
    if not matched:
        raise AggregationError("no matched sub-operations to sum")
    return math.fsum(op.plan_time for op in matched)


def bin_equal_width(values, k: int) -> tuple[np.ndarray, np.ndarray]:
    """One-hot ``(len(values), k)`` assignment and the ``k + 1`` bin edges.

    Bins are half-open ``[lo, hi)`` except the last, which is closed so the
    maximum lands in bin ``k - 1``.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot bin an empty sequence")
    if k < 1:
        raise ValueError("need at least one bin")
    lo, hi = float(v.min()), float(v.max())
    edges = np.linspace(lo, hi, k + 1)
    if lo == hi:
        warnings.warn(f"degenerate range [{lo}, {hi}]; all values assigned to bin 0", stacklevel=2)
        idx = np.zeros(v.size, dtype=int)
    else:
        idx = np.clip(np.floor((v - lo) / (hi - lo) * k).astype(int), 0, k - 1)
    onehot = np.zeros((v.size, k), dtype=bool)
    onehot[np.arange(v.size), idx] = True
    return onehot, edges


def contingency(x, y) -> tuple[int, int, int, int]:
    """``(n11, n10, n01, n00)`` for two boolean columns."""
    x = np.asarray(x, dtype=bool)
    y = np.asarray(y, dtype=bool)
    if x.shape != y.shape:
        raise ValueError("columns differ in length")
    n11 = int(np.sum(x & y))
    n10 = int(np.sum(x & ~y))
    n01 = int(np.sum(~x & y))
    n00 = x.size - n11 - n10 - n01
    return n11, n10, n01, n00


def phi_from_counts(n11: int, n10: int, n01: int, n00: int) -> float:
    # marginal-product denominator; a cell-product one is zero for perfect association
    rows = (n11 + n10) * (n01 + n00)
    cols = (n11 + n01) * (n10 + n00)
    if rows == 0 or cols == 0:
        raise UndefinedCorrelation("phi undefined for a constant column")
    return (n11 * n00 - n10 * n01) / math.sqrt(rows * cols)


def phi_coefficient(x, y) -> float:
    return phi_from_counts(*contingency(x, y))


def filter_attributes(
    data: BinaryDataset,
    feature_labels: Sequence[str],
    target_labels: Sequence[str],
    cutoff: float = 0.7,
) -> tuple[BinaryDataset, dict]:
    """Keep a feature iff its largest ``|phi|`` against any target reaches ``cutoff``.

    Columns that are neither features nor targets (the fault column) pass
    through untouched.
    """
    if not 0 < cutoff < 1:
        raise ValueError("cutoff must lie in (0, 1)")
    missing = [t for t in target_labels if t not in data.labels]
    if missing:
        raise ValueError(f"target columns missing: {missing}")
    features = set(feature_labels)
    max_phi: dict[str, float] = {}
    for f in feature_labels:
        x = data.column(f)
        best = 0.0
        for t in target_labels:
            try:
                best = max(best, abs(phi_coefficient(x, data.column(t))))
            except UndefinedCorrelation:
                log.warning("constant column in phi(%s, %s); treated as uncorrelated", f, t)
        max_phi[f] = best
    kept = [f for f in feature_labels if max_phi[f] >= cutoff]
    dropped = [f for f in feature_labels if max_phi[f] < cutoff]
    keep = set(kept)
    columns = [c for c in data.labels if c not in features or c in keep]
    report = {
        "cutoff": cutoff,
        "max_abs_phi": max_phi,
        "kept": kept,
        "dropped": dropped,
        "n_kept": len(kept),
        "n_dropped": len(dropped),
    }
    return data.select(columns), report


def _sort_key(p):
    s = str(p)
    return (0, int(s), s) if s.lstrip("-").isdigit() else (1, 0, s)


def build_binary_table(
    vehicles: Sequence[VehicleRecord],
    subops: Sequence[SubOpRecord],
    k_bins: int = 4,
) -> tuple[BinaryDataset, dict]:
    """Columns: ``FaE_<id>`` (sorted ids), ``Er_1..k``, ``Pz_1..k``, ``Fe``."""
    if not vehicles or not subops:
        raise ValueError("need at least one vehicle and one sub-operation")
    used, er, pz = [], [], []
    for v in vehicles:
        matched = match_subops(v, subops)
        if not matched:
            continue
        used.append(v)
        er.append(aggregate_ergonomics(matched))
        pz.append(aggregate_plan_time(matched))
    excluded = len(vehicles) - len(used)
    if excluded:
        log.warning("%d vehicle(s) without matching sub-operations excluded", excluded)
    if not used:
        raise AggregationError("no vehicle matched any sub-operation")

    props = sorted({p for v in used for p in v.properties}, key=_sort_key)
    fae = np.array([[p in v.properties for p in props] for v in used], dtype=bool)
    er_bins, er_edges = bin_equal_width(er, k_bins)
    pz_bins, pz_edges = bin_equal_width(pz, k_bins)
    fault = np.array([[v.fault] for v in used], dtype=bool)

    labels = ([f"FaE_{p}" for p in props] + [f"Er_{i + 1}" for i in range(k_bins)]
              + [f"Pz_{i + 1}" for i in range(k_bins)] + ["Fe"])
    table = BinaryDataset(np.hstack([fae, er_bins, pz_bins, fault]), tuple(labels))
    info = {
        "n_vehicles": len(vehicles),
        "n_excluded": excluded,
        "er_bin_edges": er_edges.tolist(),
        "pz_bin_edges": pz_edges.tolist(),
        "feature_labels": labels[: len(props)],
        "target_labels": labels[len(props): len(props) + 2 * k_bins],
    }
    return table, info


def _split_props(field: str) -> frozenset:
    return frozenset(p.strip() for p in field.split(";") if p.strip())


def read_vehicles_csv(path) -> list[VehicleRecord]:
    with open(path, newline="") as fh:
        return [
            VehicleRecord(_split_props(row["properties"]), row["fault"].strip() in ("1", "true", "True"),
                          row["vehicle_id"])
            for row in csv.DictReader(fh)
        ]


def read_subops_csv(path) -> list[SubOpRecord]:
    with open(path, newline="") as fh:
        return [
            SubOpRecord(_split_props(row["properties"]), float(row["ergonomics"]), float(row["plan_time"]),
                        row["subop_id"])
            for row in csv.DictReader(fh)
        ]
