"""PC algorithm for binary data: G^2 conditional-independence tests for the
skeleton, then v-structures and Meek's rules for orientation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import chi2

from .dataset import BinaryDataset
from .graph import MixedGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PcConfig:
    alpha: float = 0.05
    max_cond_set: int | None = 3
    stable: bool = True
    test: str = "g2"
    min_samples_per_dof: float = 5.0
    lowpower_delete: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_cond_set is not None and self.max_cond_set < 0:
            raise ValueError("max_cond_set must be >= 0")
        if self.test not in ("g2", "chi2"):
            raise ValueError(f"unknown test {self.test!r}")


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    dof: int
    p_value: float
    independent: bool
    low_power: bool = False


def _stratified_counts(x: np.ndarray, y: np.ndarray, z: np.ndarray | None) -> np.ndarray:
    """Counts with shape ``(2**|z|, 2, 2)`` indexed by (stratum, x, y)."""
    cell = 2 * x + y
    if z is None or z.shape[1] == 0:
        return np.bincount(cell, minlength=4).reshape(1, 2, 2)
    k = z.shape[1]
    stratum = z @ (1 << np.arange(k))
    return np.bincount(4 * stratum + cell, minlength=4 << k).reshape(-1, 2, 2)


def _statistic(counts: np.ndarray, test: str) -> tuple[float, int]:
    counts = counts.astype(float)
    row = counts.sum(axis=2, keepdims=True)
    col = counts.sum(axis=1, keepdims=True)
    total = row.sum(axis=1, keepdims=True)
    # strata where x or y is constant carry no information
    informative = (np.count_nonzero(row[:, :, 0], axis=1) == 2) & (np.count_nonzero(col[:, 0, :], axis=1) == 2)
    if not informative.any():
        return 0.0, 0
    counts, row, col, total = counts[informative], row[informative], col[informative], total[informative]
    expected = row * col / total
    if test == "g2":
        nz = counts > 0
        stat = 2.0 * np.sum(counts[nz] * np.log(counts[nz] / expected[nz]))
    else:
        stat = np.sum((counts - expected) ** 2 / expected)
    return max(float(stat), 0.0), int(informative.sum())


def ci_test(
    data: np.ndarray,
    x: int,
    y: int,
    z=(),
    alpha: float = 0.05,
    test: str = "g2",
    min_samples_per_dof: float = 5.0,
    lowpower_delete: bool = True,
) -> CiTestResult:
    """Test ``x _||_ y | z`` on an integer 0/1 matrix.

    The test is flagged low-power when fewer than ``min_samples_per_dof``
    samples per nominal degree of freedom (``2**|z|``) are available; it then
    reports independence, or dependence when ``lowpower_delete`` is off.
    """
    z = tuple(z)
    if x == y or x in z or y in z:
        raise ValueError("x, y and z must be disjoint")
    zmat = data[:, list(z)] if z else None
    counts = _stratified_counts(data[:, x], data[:, y], zmat)
    nominal_dof = 1 << len(z)
    if data.shape[0] < min_samples_per_dof * nominal_dof:
        return CiTestResult(0.0, nominal_dof, 1.0, lowpower_delete, low_power=True)
    stat, dof = _statistic(counts, test)
    if dof == 0:
        return CiTestResult(0.0, 0, 1.0, True)
    p = float(chi2.sf(stat, dof))
    return CiTestResult(stat, dof, p, p > alpha)


def ci_test_g2(data: BinaryDataset, x: str, y: str, z=(), alpha: float = 0.05, **kw) -> CiTestResult:
    """Label-based G^2 test on a dataset."""
    idx = data.labels.index
    return ci_test(data.values.astype(np.int64), idx(x), idx(y), [idx(c) for c in z], alpha, **kw)


def learn_skeleton(data: BinaryDataset, cfg: PcConfig = PcConfig()):
    """Returns a symmetric boolean adjacency and ``{(i, j): sepset}`` for removed pairs."""
    if data.n < 2:
        raise ValueError("PC needs at least two columns")
    x = data.values.astype(np.int64)
    d = data.n
    adj = ~np.eye(d, dtype=bool)
    sepsets: dict[tuple[int, int], frozenset] = {}
    level = 0
    while cfg.max_cond_set is None or level <= cfg.max_cond_set:
        frozen = [np.flatnonzero(adj[i]) for i in range(d)] if cfg.stable else None
        any_testable = False
        for i in range(d):
            for j in range(d):
                if i == j or not adj[i, j]:
                    continue
                nbrs = frozen[i] if cfg.stable else np.flatnonzero(adj[i])
                candidates = [int(k) for k in nbrs if k != j]
                if len(candidates) < level:
                    continue
                any_testable = True
                for s in combinations(candidates, level):
                    res = ci_test(x, i, j, s, cfg.alpha, cfg.test, cfg.min_samples_per_dof, cfg.lowpower_delete)
                    if res.independent:
                        adj[i, j] = adj[j, i] = False
                        sepsets[(i, j)] = sepsets[(j, i)] = frozenset(s)
                        break
        if not any_testable:
            break
        level += 1
    return adj, sepsets


def orient(adj: np.ndarray, sepsets: dict) -> MixedGraph:
    """v-structures followed by Meek rules 1-4."""
    d = adj.shape[0]
    # directed[i, j] means i -> j; an adjacency with neither direction is undirected
    directed = np.zeros((d, d), dtype=bool)

    def orient_edge(a, b) -> bool:
        if directed[a, b]:
            return False
        if directed[b, a]:
            log.debug("orientation conflict on %d-%d; keeping %d -> %d", a, b, b, a)
            return False
        directed[a, b] = True
        return True

    for z in range(d):
        nb = np.flatnonzero(adj[z])
        for a, b in combinations(nb, 2):
            if adj[a, b] or z in sepsets.get((a, b), frozenset()):
                continue
            orient_edge(a, z)
            orient_edge(b, z)

    def undirected(a, b):
        return adj[a, b] and not directed[a, b] and not directed[b, a]

    changed = True
    while changed:
        changed = False
        for a in range(d):
            for b in range(d):
                if not undirected(a, b):
                    continue
                # R1: c -> a - b, c and b non-adjacent
                if any(directed[c, a] and not adj[c, b] and c != b for c in range(d)):
                    changed |= orient_edge(a, b)
                    continue
                # R2: a -> c -> b
                if any(directed[a, c] and directed[c, b] for c in range(d)):
                    changed |= orient_edge(a, b)
                    continue
                # R3: a - c -> b, a - e -> b, c and e non-adjacent
                kites = [c for c in range(d) if undirected(a, c) and directed[c, b]]
                if any(not adj[c, e] for c, e in combinations(kites, 2)):
                    changed |= orient_edge(a, b)
                    continue
                # R4: a - c -> e -> b, a adjacent e, c and b non-adjacent
                if any(
                    undirected(a, c) and directed[c, e] and directed[e, b] and adj[a, e] and not adj[c, b]
                    for c in range(d) for e in range(d) if c not in (a, b) and e not in (a, b, c)
                ):
                    changed |= orient_edge(a, b)

    dir_edges = {(int(i), int(j)) for i, j in zip(*np.nonzero(directed))}
    und = {(int(i), int(j)) for i, j in zip(*np.nonzero(adj)) if i < j and not directed[i, j] and not directed[j, i]}
    return MixedGraph(d, frozenset(dir_edges), frozenset(und))


def pc(data: BinaryDataset, cfg: PcConfig = PcConfig()) -> MixedGraph:
    adj, sepsets = learn_skeleton(data, cfg)
    g = orient(adj, sepsets)
    return MixedGraph(g.d, g.directed, g.undirected, data.labels)
