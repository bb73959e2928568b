"""Adjacency types shared by the discovery algorithms.

Convention everywhere: entry ``(i, j)`` describes the edge ``i -> j``
(cause in the row, effect in the column).
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_OMEGA = 0.3


class CycleError(ValueError):
    """Raised when a topological order is requested for a cyclic graph."""

    def __init__(self, edge: tuple[int, int]):
        super().__init__(f"graph contains a cycle through edge {edge[0]} -> {edge[1]}")
        self.edge = edge


def _default_labels(d: int) -> tuple[str, ...]:
    return tuple(f"X{i}" for i in range(d))


def _check_labels(labels: Sequence[str] | None, d: int) -> tuple[str, ...]:
    if labels is None:
        return _default_labels(d)
    labels = tuple(str(x) for x in labels)
    if len(labels) != d:
        raise ValueError(f"expected {d} labels, got {len(labels)}")
    if len(set(labels)) != d:
        raise ValueError("labels must be unique")
    return labels


@dataclass(frozen=True)
class WeightedAdjacency:
    entries: np.ndarray
    labels: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        w = np.array(self.entries, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("adjacency contains non-finite entries")
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)
        object.__setattr__(self, "labels", _check_labels(self.labels, w.shape[0]))

    @property
    def d(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class BinaryGraph:
    entries: np.ndarray
    labels: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        b = np.array(self.entries, dtype=bool)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {b.shape}")
        if np.any(np.diag(b)):
            raise ValueError("self-loops are not allowed")
        b.setflags(write=False)
        object.__setattr__(self, "entries", b)
        object.__setattr__(self, "labels", _check_labels(self.labels, b.shape[0]))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_edges(cls, d: int, edges: Iterable[tuple[int, int]], labels=None) -> "BinaryGraph":
        b = np.zeros((d, d), dtype=bool)
        for i, j in edges:
            b[i, j] = True
        return cls(b, labels)

    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.entries))]

    def parents(self, j: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.entries[:, j])]


@dataclass(frozen=True)
class MixedGraph:
    """Partially directed graph, as produced by PC.

    ``undirected`` holds pairs normalised to ``(min, max)``.
    """

    d: int
    directed: frozenset = frozenset()
    undirected: frozenset = frozenset()
    labels: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        directed = frozenset((int(i), int(j)) for i, j in self.directed)
        undirected = frozenset((min(int(i), int(j)), max(int(i), int(j))) for i, j in self.undirected)
        for i, j in directed | undirected:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise ValueError(f"edge ({i}, {j}) out of range for d={self.d}")
        clash = {(min(i, j), max(i, j)) for i, j in directed} & undirected
        if clash:
            raise ValueError(f"pairs both directed and undirected: {sorted(clash)}")
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)
        object.__setattr__(self, "labels", _check_labels(self.labels, self.d))

    def to_matrix(self) -> np.ndarray:
        """0/1 matrix with undirected pairs written in both directions."""
        a = np.zeros((self.d, self.d), dtype=np.int8)
        for i, j in self.directed:
            a[i, j] = 1
        for i, j in self.undirected:
            a[i, j] = a[j, i] = 1
        return a


def topological_order(g: BinaryGraph) -> list[int]:
    """Kahn's algorithm; ties broken by smallest node index."""
    adj = g.entries
    indeg = adj.sum(axis=0).astype(int)
    queue = deque(i for i in range(g.d) if indeg[i] == 0)
    order = []
    while queue:
        i = queue.popleft()
        order.append(i)
        for j in np.flatnonzero(adj[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(int(j))
    if len(order) < g.d:
        remaining = set(range(g.d)) - set(order)
        # every leftover node still has a leftover parent
        j = min(remaining)
        i = next(int(p) for p in np.flatnonzero(adj[:, j]) if p in remaining)
        raise CycleError((i, j))
    return order


def is_acyclic(g: BinaryGraph) -> bool:
    try:
        topological_order(g)
    except CycleError:
        return False
    return True


def threshold(w: WeightedAdjacency, omega: float = DEFAULT_OMEGA) -> BinaryGraph:
    """Keep edges whose absolute weight is at least ``omega``."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    b = np.abs(w.entries) >= omega
    np.fill_diagonal(b, False)
    return BinaryGraph(b, w.labels)


def write_adjacency_csv(path, entries: np.ndarray, labels: Sequence[str], binary: bool) -> None:
    """Header row of labels, then one row per source node."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(labels)
        for row in np.asarray(entries):
            if binary:
                writer.writerow([int(bool(x)) for x in row])
            else:
                writer.writerow([repr(float(x)) for x in row])


def read_adjacency_csv(path) -> tuple[np.ndarray, tuple[str, ...]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty adjacency file")
    labels = tuple(rows[0])
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    d = len(labels)
    if data.shape != (d, d):
        raise ValueError(f"{path}: expected {d}x{d} entries, got {data.shape}")
    return data, labels


def save_graph(path: str | Path, g: BinaryGraph | WeightedAdjacency) -> None:
    write_adjacency_csv(path, g.entries, g.labels, binary=isinstance(g, BinaryGraph))


def load_binary_graph(path: str | Path) -> BinaryGraph:
    data, labels = read_adjacency_csv(path)
    if not np.all(np.isin(data, (0.0, 1.0))):
        raise ValueError(f"{path}: binary adjacency must contain only 0/1")
    return BinaryGraph(data.astype(bool), labels)


def load_weighted(path: str | Path) -> WeightedAdjacency:
    data, labels = read_adjacency_csv(path)
    return WeightedAdjacency(data, labels)
