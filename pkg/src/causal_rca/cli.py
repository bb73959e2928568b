"""Command-line entry point: simulate, preprocess, discover, evaluate, bench, report."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .dagma import DagmaConfig, dagma
from .dataset import read_dataset_csv, write_dataset_csv
from .graph import (BinaryGraph, MixedGraph, WeightedAdjacency, load_binary_graph, read_adjacency_csv,
                    save_graph, threshold, write_adjacency_csv)
from .metrics import evaluate, mixed_to_binary
from .notears import NotearsConfig, notears
from .pc import PcConfig, pc
from .preprocess import build_binary_table, filter_attributes, read_subops_csv, read_vehicles_csv
from .simulate import TierSpec, generate_ground_truth, sample_dataset

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("causal_rca")


class ConfigError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_suffix(".json")


def _tier_spec(args, seed: int) -> TierSpec:
    kw = dict(edge_probability=args.edge_prob, allow_skip_edges=args.skip_edges, seed=seed)
    if getattr(args, "weight_range", None):
        kw["weight_range"] = tuple(args.weight_range)
    return TierSpec.from_counts(args.tiers, **kw)


def cmd_simulate(args) -> int:
    spec = _tier_spec(args, args.seed)
    gt = generate_ground_truth(spec)
    # dataset stream is distinct from the structure stream
    data = sample_dataset(gt, args.m, bench._data_seed(args.seed, 0))
    write_dataset_csv(args.out_data, data)
    save_graph(args.out_truth, gt.graph)
    gt.save_sidecar(sidecar_path(args.out_truth))
    log.info("simulated %d x %d dataset, %d true edges", data.m, data.n, len(gt.graph.edges()))
    return EXIT_OK


def cmd_preprocess(args) -> int:
    if args.bin_mode != "equal-width":
        raise ConfigError(f"bin mode {args.bin_mode!r} is not implemented")
    vehicles = read_vehicles_csv(args.vehicles)
    subops = read_subops_csv(args.subops)
    table, info = build_binary_table(vehicles, subops, args.bins)
    filtered, rep = filter_attributes(table, info["feature_labels"], info["target_labels"], args.phi_cutoff)
    write_dataset_csv(args.out, filtered)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump({**info, **rep, "columns": list(filtered.labels)}, fh, indent=2)
    log.info("kept %d of %d properties", rep["n_kept"], len(info["feature_labels"]))
    return EXIT_OK


def cmd_discover(args) -> int:
    data = read_dataset_csv(args.input)
    diag: dict = {"algorithm": args.algo}
    if args.algo == "pc":
        cfg = PcConfig(alpha=args.alpha, max_cond_set=args.max_cond, test=args.ci_test,
                       lowpower_delete=not args.no_lowpower_delete)
        g = pc(data, cfg)
        write_adjacency_csv(args.out, g.to_matrix(), data.labels, binary=True)
        with open(sidecar_path(args.out), "w") as fh:
            json.dump({"labels": list(data.labels),
                       "directed": sorted([list(e) for e in g.directed]),
                       "undirected": sorted([list(e) for e in g.undirected]),
                       "convention": "entry (i, j) is the edge i -> j; undirected pairs written both ways"},
                      fh, indent=2)
        diag.update(config=dataclasses.asdict(cfg), n_directed=len(g.directed), n_undirected=len(g.undirected))
    else:
        if args.algo == "notears":
            cfg = NotearsConfig(lambda1=args.lambda1 if args.lambda1 is not None else 0.1,
                                h_tol=args.h_tol, omega=args.omega, loss=args.loss)
            res = notears(data, cfg)
        else:
            cfg = DagmaConfig(s=args.s, mu_schedule=tuple(args.mu),
                              lambda1=args.lambda1 if args.lambda1 is not None else DagmaConfig.lambda1,
                              omega=args.omega)
            res = dagma(data, cfg)
        save_graph(args.out, threshold(res.adjacency, cfg.omega))
        if args.out_weights:
            save_graph(args.out_weights, res.adjacency)
        diag.update(config=dataclasses.asdict(cfg), **res.diagnostics())
    if args.diag:
        with open(args.diag, "w") as fh:
            json.dump(diag, fh, indent=2, default=str)
    return EXIT_OK


def load_learned(path, truth: BinaryGraph, omega: float) -> tuple[BinaryGraph, dict]:
    """Binary CSV, PC output with an undirected-pairs sidecar, or weighted CSV."""
    entries, labels = read_adjacency_csv(path)
    side = sidecar_path(path)
    info: dict = {}
    if side.exists():
        meta = json.loads(side.read_text())
        if "undirected" in meta:
            g = MixedGraph(len(labels), frozenset(map(tuple, meta["directed"])),
                           frozenset(map(tuple, meta["undirected"])), labels)
            learned, info = mixed_to_binary(g, truth)
            return learned, info
    if np.all(np.isin(entries, (0.0, 1.0))):
        return BinaryGraph(entries.astype(bool), labels), info
    return threshold(WeightedAdjacency(entries, labels), omega), {"thresholded_at": omega}


def cmd_evaluate(args) -> int:
    truth = load_binary_graph(args.truth)
    learned, info = load_learned(args.learned, truth, args.omega)
    result = evaluate(learned, truth, args.include_diagonal)
    result.update(info)
    text = json.dumps(result, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def _bench_config(args) -> bench.BenchConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    cfg = bench.BenchConfig.from_json(base) if base else bench.BenchConfig()
    over = {}
    if args.algos:
        over["algorithms"] = tuple(a.strip() for a in args.algos.split(",") if a.strip())
    if args.paper_grid:
        over["m_grid"] = bench.FULL_GRID
    elif args.m_grid:
        over["m_grid"] = tuple(args.m_grid)
    if args.trials is not None:
        over["trials"] = args.trials
    if args.seed is not None:
        over["base_seed"] = args.seed
    if args.independent_datasets:
        over["independent_datasets"] = True
    ts = {}
    if args.tiers:
        ts["tiers"] = TierSpec.from_counts(args.tiers).tiers
    if args.edge_prob is not None:
        ts["edge_probability"] = args.edge_prob
    if args.skip_edges:
        ts["allow_skip_edges"] = True
    if ts:
        over["tier_spec"] = dataclasses.replace(cfg.tier_spec, **ts)
    return dataclasses.replace(cfg, **over)


def cmd_bench(args) -> int:
    cfg = _bench_config(args)
    n_cells = len(cfg.algorithms) * len(cfg.m_grid) * cfg.trials
    log.info("running %d cells with %d job(s)", n_cells, args.jobs)

    def progress(rec):
        state = "FAILED" if rec.failed else f"f1={rec.f1:.3f} t={rec.runtime_seconds:.2f}s"
        log.info("%-8s m=%-6d trial=%-3d %s", rec.algorithm, rec.m, rec.trial, state)

    records = bench.run_benchmark(cfg, jobs=args.jobs, progress=progress)
    report = bench.emit_report(records, args.out_dir, cfg)
    with open(Path(args.out_dir) / "config.json", "w") as fh:
        json.dump(cfg.to_json(), fh, indent=2)
    return EXIT_PARTIAL if report["n_failed"] else EXIT_OK


def cmd_report(args) -> int:
    in_dir = Path(args.in_dir)
    records = bench.read_records(in_dir / "records.csv")
    cfg = None
    if (in_dir / "config.json").exists():
        cfg = bench.BenchConfig.from_json(json.loads((in_dir / "config.json").read_text()))
    report = bench.emit_report(records, args.out_dir or in_dir, cfg)
    if args.markdown:
        print((Path(args.out_dir or in_dir) / "report.md").read_text())
    return EXIT_PARTIAL if report["n_failed"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causal-rca", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="sample a tiered ground truth and a binary dataset")
    s.add_argument("--tiers", type=_ints, default=[25, 8, 1])
    s.add_argument("--edge-prob", type=float, default=TierSpec.edge_probability)
    s.add_argument("--skip-edges", action="store_true")
    s.add_argument("--weight-range", type=_floats)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-data", required=True)
    s.add_argument("--out-truth", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("preprocess", help="vehicle and sub-operation CSVs to a filtered binary table")
    s.add_argument("--vehicles", required=True)
    s.add_argument("--subops", required=True)
    s.add_argument("--bins", type=int, default=4)
    s.add_argument("--bin-mode", default="equal-width", choices=["equal-width", "equal-frequency"])
    s.add_argument("--phi-cutoff", type=float, default=0.7)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("discover", help="learn a graph from a binary dataset CSV")
    s.add_argument("--algo", choices=bench.ALGORITHMS, required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--diag")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--max-cond", type=int, default=3)
    s.add_argument("--ci-test", choices=["g2", "chi2"], default="g2")
    s.add_argument("--no-lowpower-delete", action="store_true")
    s.add_argument("--lambda1", type=float)
    s.add_argument("--h-tol", type=float, default=1e-8)
    s.add_argument("--loss", choices=["l2", "logistic"], default="l2")
    s.add_argument("--omega", type=float, default=0.3)
    s.add_argument("--s", type=float, default=1.0)
    s.add_argument("--mu", type=_floats, default=[1.0, 0.1, 0.01, 0.001])
    s.add_argument("--out-weights")
    s.set_defaults(func=cmd_discover)

    s = sub.add_parser("evaluate", help="score a learned adjacency against the truth")
    s.add_argument("--learned", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--out")
    s.add_argument("--omega", type=float, default=0.3)
    s.add_argument("--include-diagonal", action="store_true")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("bench", help="run the algorithm comparison over an M grid")
    s.add_argument("--config")
    s.add_argument("--algos")
    s.add_argument("--m-grid", type=_ints)
    s.add_argument("--paper-grid", action="store_true", help="use the full grid 500 to 100000")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--tiers", type=_ints)
    s.add_argument("--edge-prob", type=float)
    s.add_argument("--skip-edges", action="store_true")
    s.add_argument("--independent-datasets", action="store_true")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("report", help="re-aggregate a finished benchmark directory")
    s.add_argument("--in-dir", required=True)
    s.add_argument("--out-dir")
    s.add_argument("--markdown", action="store_true")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
