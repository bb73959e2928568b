"""Tiered ground-truth DAGs and logistic-Bernoulli sampling of binary data.

Nodes are arranged in consecutive tiers (vehicle properties, ergonomics /
plan-time intervals, fault) and edges only point from an earlier tier to a
later one.  Each node is a Bernoulli variable whose log-odds are a linear
combination of its parents plus a bias.

With ``center_logits`` the bias of every non-root node is shifted by minus
the expected parent contribution, so its log-odds are centred on a draw from
``U[-1, 1]`` instead of drifting into saturation when several strong parents
share a sign.  Saturated children are nearly constant columns, which no
discovery method can attach to their parents.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .dataset import BinaryDataset
from .graph import BinaryGraph, topological_order

DEFAULT_TIERS = (("FaE", 25), ("ErPz", 8), ("Fe", 1))


def make_rng(seed: int) -> np.random.Generator:
    # PCG64 is fully specified, so streams are identical across platforms
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class TierSpec:
    tiers: tuple[tuple[str, int], ...] = DEFAULT_TIERS
    edge_probability: float = 0.1
    allow_skip_edges: bool = False
    weight_range: tuple[float, float] = (4.0, 8.0)
    seed: int = 0
    center_logits: bool = True
    centering_samples: int = 20000

    def __post_init__(self):
        tiers = tuple((str(name), int(n)) for name, n in self.tiers)
        if not tiers:
            raise ValueError("at least one tier is required")
        if any(n < 1 for _, n in tiers):
            raise ValueError("every tier needs at least one node")
        object.__setattr__(self, "tiers", tiers)
        if not 0 <= self.edge_probability <= 1:
            raise ValueError("edge_probability must lie in [0, 1]")
        low, high = self.weight_range
        if not 0 < low <= high:
            raise ValueError("weight_range must satisfy 0 < low <= high")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def d(self) -> int:
        return sum(n for _, n in self.tiers)

    @classmethod
    def from_counts(cls, counts, **kw) -> "TierSpec":
        counts = list(counts)
        names = [name for name, _ in DEFAULT_TIERS] if len(counts) == len(DEFAULT_TIERS) else \
            [f"T{k}" for k in range(len(counts))]
        return cls(tiers=tuple(zip(names, counts)), **kw)

    def node_labels(self) -> tuple[str, ...]:
        labels = []
        for name, n in self.tiers:
            labels.extend(f"{name}_{k + 1}" for k in range(n))
        return tuple(labels)


@dataclass(frozen=True)
class GroundTruth:
    graph: BinaryGraph
    weights: np.ndarray  # d x d, zero where there is no edge
    biases: np.ndarray
    tier_of: tuple[int, ...]
    spec: TierSpec = field(default_factory=TierSpec)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.graph.labels

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "tiers": [[name, n] for name, n in self.spec.tiers],
            "tier_of": list(self.tier_of),
            "biases": self.biases.tolist(),
            "edges": [
                {"source": int(i), "target": int(j), "weight": float(self.weights[i, j])}
                for i, j in self.graph.edges()
            ],
            "edge_probability": self.spec.edge_probability,
            "allow_skip_edges": self.spec.allow_skip_edges,
            "weight_range": list(self.spec.weight_range),
            "center_logits": self.spec.center_logits,
            "seed": self.spec.seed,
            "convention": "entry (i, j) is the edge i -> j",
        }

    def save_sidecar(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def generate_ground_truth(spec: TierSpec) -> GroundTruth:
    rng = make_rng(spec.seed)
    d = spec.d
    tier_of = np.repeat(np.arange(len(spec.tiers)), [n for _, n in spec.tiers])
    ti, tj = tier_of[:, None], tier_of[None, :]
    candidate = (tj == ti + 1) | ((tj > ti) & spec.allow_skip_edges)

    # one draw per matrix cell keeps the edge pattern stable when flags change
    coin = rng.random((d, d))
    magnitude = rng.uniform(*spec.weight_range, size=(d, d))
    sign = np.where(rng.random((d, d)) < 0.5, -1.0, 1.0)
    biases = rng.uniform(-1.0, 1.0, size=d)

    adj = candidate & (coin < spec.edge_probability)
    weights = np.where(adj, sign * magnitude, 0.0)
    graph = BinaryGraph(adj, spec.node_labels())
    if spec.center_logits:
        biases = _centred_biases(graph, weights, biases, spec.centering_samples, rng)
    return GroundTruth(graph, weights, biases, tuple(int(t) for t in tier_of), spec)


def _centred_biases(graph, weights, offsets, m, rng) -> np.ndarray:
    """Single ancestral pass; parent means come from the rows already drawn."""
    u = rng.random((m, graph.d))
    x = np.zeros((m, graph.d))
    biases = offsets.copy()
    for v in topological_order(graph):
        parents = graph.parents(v)
        if parents:
            biases[v] = offsets[v] - weights[parents, v] @ x[:, parents].mean(axis=0)
        x[:, v] = u[:, v] < expit(biases[v] + x[:, parents] @ weights[parents, v])
    return biases


def sample_dataset(gt: GroundTruth, m: int, seed: int) -> BinaryDataset:
    """Draw ``m`` rows by ancestral sampling in topological order.

    Uniforms are drawn as one row-major ``m x d`` block, so the dataset for a
    smaller ``m`` is a prefix of the dataset for a larger one.
    """
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")
    d = gt.graph.d
    u = make_rng(seed).random((m, d))
    x = np.zeros((m, d), dtype=bool)
    for v in topological_order(gt.graph):
        parents = gt.graph.parents(v)
        logit = np.full(m, gt.biases[v])
        if parents:
            logit += x[:, parents].astype(float) @ gt.weights[parents, v]
        x[:, v] = u[:, v] < expit(logit)
    return BinaryDataset(x, gt.labels)
