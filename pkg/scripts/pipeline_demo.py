"""Preprocess a small synthetic vehicle / sub-operation table and run PC on it.

Writes vehicles.csv and subops.csv to --work-dir, builds the binary table,
filters properties by phi and prints the graph PC learns on the result.
"""
import argparse
from pathlib import Path

import numpy as np

from causal_rca.dataset import write_dataset_csv
from causal_rca.pc import PcConfig, pc
from causal_rca.preprocess import SubOpRecord, VehicleRecord, build_binary_table, filter_attributes


def synthesize(n_vehicles, n_props, seed):
    rng = np.random.default_rng(seed)
    subops = [SubOpRecord(frozenset({str(p)}), float(rng.uniform(10, 50)), float(rng.uniform(0.5, 3)), f"s{p}")
              for p in range(1, n_props + 1)]
    heavy = {str(p) for p in range(1, 4)}
    vehicles = []
    for i in range(n_vehicles):
        props = {str(p) for p in range(1, n_props + 1) if rng.random() < 0.3} or {"1"}
        # faults are more likely when demanding sub-operations accumulate
        load = sum(op.ergonomics for op in subops if op.properties <= props)
        fault = rng.random() < 1 / (1 + np.exp(-(load - 150) / 30))
        vehicles.append(VehicleRecord(frozenset(props | (heavy if rng.random() < 0.2 else set())), bool(fault), f"v{i}"))
    return vehicles, subops


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--work-dir", type=Path, default=Path("demo"))
    p.add_argument("--vehicles", type=int, default=3000)
    p.add_argument("--props", type=int, default=12)
    p.add_argument("--cutoff", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    args.work_dir.mkdir(parents=True, exist_ok=True)

    vehicles, subops = synthesize(args.vehicles, args.props, args.seed)
    table, info = build_binary_table(vehicles, subops, k_bins=4)
    filtered, rep = filter_attributes(table, info["feature_labels"], info["target_labels"], args.cutoff)
    write_dataset_csv(args.work_dir / "table.csv", filtered)
    print(f"kept {rep['n_kept']} of {len(info['feature_labels'])} properties: {rep['kept']}")

    g = pc(filtered, PcConfig())
    names = filtered.labels
    for i, j in sorted(g.directed):
        print(f"{names[i]} -> {names[j]}")
    for i, j in sorted(g.undirected):
        print(f"{names[i]} -- {names[j]}")


if __name__ == "__main__":
    main()
