from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class BinaryDataset:
    """``m x n`` boolean sample matrix with one label per column."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=bool)
        if v.ndim != 2:
            raise ValueError(f"dataset must be 2-D, got shape {v.shape}")
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != v.shape[1]:
            raise ValueError(f"{v.shape[1]} columns but {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise ValueError("column labels must be unique")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def select(self, labels: Sequence[str]) -> "BinaryDataset":
        idx = [self.labels.index(lab) for lab in labels]
        return BinaryDataset(self.values[:, idx], tuple(labels))

    def head(self, m: int) -> "BinaryDataset":
        return BinaryDataset(self.values[:m], self.labels)

    def as_float(self) -> np.ndarray:
        return self.values.astype(float)


def write_dataset_csv(path, data: BinaryDataset) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(data.labels) + "\n")
        np.savetxt(fh, data.values.astype(np.int8), fmt="%d", delimiter=",")


def read_dataset_csv(path) -> BinaryDataset:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
        rows = np.loadtxt(fh, delimiter=",", dtype=np.int64, ndmin=2)
    if rows.size == 0:
        rows = rows.reshape(0, len(header))
    if not np.all((rows == 0) | (rows == 1)):
        raise ValueError(f"{path}: dataset entries must be 0 or 1")
    return BinaryDataset(rows.astype(bool), tuple(header))
