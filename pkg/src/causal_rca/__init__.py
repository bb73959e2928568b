"""Causal discovery for root-cause analysis on binary manufacturing-quality data."""
from .dataset import BinaryDataset
from .graph import BinaryGraph, MixedGraph, WeightedAdjacency, is_acyclic, threshold, topological_order
from .simulate import GroundTruth, TierSpec, generate_ground_truth, sample_dataset
from .pc import PcConfig, pc
from .notears import NotearsConfig, notears
from .dagma import DagmaConfig, dagma

__all__ = [
    "BinaryDataset", "BinaryGraph", "MixedGraph", "WeightedAdjacency", "is_acyclic", "threshold",
    "topological_order", "GroundTruth", "TierSpec", "generate_ground_truth", "sample_dataset",
    "PcConfig", "pc", "NotearsConfig", "notears", "DagmaConfig", "dagma",
]
