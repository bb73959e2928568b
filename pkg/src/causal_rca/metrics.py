"""Elementwise comparison of a learned adjacency matrix against the truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BinaryGraph, MixedGraph


class ComparisonError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Ratio:
    """A metric value; ``undefined`` marks a zero denominator (value reported as 0)."""

    value: float
    undefined: bool = False

    def __float__(self) -> float:
        return self.value


def confusion(learned: BinaryGraph, truth: BinaryGraph, include_diagonal: bool = False) -> ConfusionCounts:
    if learned.d != truth.d:
        raise ComparisonError(f"dimension mismatch: {learned.d} vs {truth.d}")
    if learned.labels != truth.labels:
        raise ComparisonError("label order differs; relabel before comparing")
    mask = np.ones((truth.d, truth.d), dtype=bool)
    if not include_diagonal:
        np.fill_diagonal(mask, False)
    lhat, t = learned.entries[mask], truth.entries[mask]
    return ConfusionCounts(
        tp=int(np.sum(lhat & t)),
        tn=int(np.sum(~lhat & ~t)),
        fp=int(np.sum(lhat & ~t)),
        fn=int(np.sum(~lhat & t)),
    )


def shd(c: ConfusionCounts) -> int:
    return c.fp + c.fn


def _ratio(num: int, den: int) -> Ratio:
    if den == 0:
        return Ratio(0.0, undefined=True)
    return Ratio(num / den)


def precision(c: ConfusionCounts) -> Ratio:
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ConfusionCounts) -> Ratio:
    return _ratio(c.tp, c.tp + c.fn)


def f1(c: ConfusionCounts) -> Ratio:
    return _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)


def evaluate(learned: BinaryGraph, truth: BinaryGraph, include_diagonal: bool = False) -> dict:
    """Counts, the four metrics and any undefined-denominator flags."""
    c = confusion(learned, truth, include_diagonal)
    p, r, f = precision(c), recall(c), f1(c)
    flags = [name for name, v in (("precision", p), ("recall", r), ("f1", f)) if v.undefined]
    return {
        "tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn,
        "shd": shd(c), "precision": p.value, "recall": r.value, "f1": f.value,
        "undefined": flags,
    }


def mixed_to_binary(g: MixedGraph, truth: BinaryGraph) -> tuple[BinaryGraph, dict]:
    """Resolve each undirected pair into a single predicted edge.

    The pair takes the orientation of the true edge when one exists,
    otherwise the canonical ``i -> j`` with ``i < j``.
    """
    if g.d != truth.d:
        raise ComparisonError(f"dimension mismatch: {g.d} vs {truth.d}")
    b = np.zeros((g.d, g.d), dtype=bool)
    for i, j in g.directed:
        b[i, j] = True
    resolved = arbitrary = 0
    t = truth.entries
    for i, j in sorted(g.undirected):
        if t[j, i] and not t[i, j]:
            b[j, i] = True
            resolved += 1
        else:
            b[i, j] = True
            if t[i, j]:
                resolved += 1
            else:
                arbitrary += 1
    return BinaryGraph(b, truth.labels), {"truth_resolved": resolved, "arbitrary": arbitrary}
