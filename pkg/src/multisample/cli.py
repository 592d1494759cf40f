"""Command line entry point: gen, run, gap, cluster."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench.data import ALGORITHMS, ExperimentConfig, generate_trial
from .bench.experiment import (cluster_labels, dsc_config, dump_json, run_experiment,
                               trials_csv, trials_json)
from .core import RngHandle, load_dataset, save_dataset
from .dsc import DSCConfig
from .oracle import TrainingConfig
from .theory import compute_gap

log = logging.getLogger("multisample")


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _add_common(p, trials=True):
    p.add_argument("--seed", type=int, default=None)
    if trials:
        p.add_argument("--trials", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--algorithms", default=None,
                   help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--out", type=Path, required=True)


def _overrides(args) -> dict:
    o = {}
    if args.seed is not None:
        o["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        o["num_trials"] = args.trials
    if args.noise_sigma is not None:
        o["noise_sigma"] = args.noise_sigma
    if args.algorithms is not None:
        o["algorithms"] = args.algorithms
    if args.tau is not None:
        o["tau"] = args.tau
    if getattr(args, "workers", None) is not None:
        o["workers"] = args.workers
    if getattr(args, "points", None) is not None:
        o["points_per_sample"] = args.points
    return o


def cmd_gen(args) -> int:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    over = _overrides(args)
    over.pop("num_trials", None)
    if args.dims is not None:
        over["noise_dims"] = args.dims - cfg.signal_dims
    cfg = replace(cfg, **over)
    t = generate_trial(cfg, args.trial)
    args.out.mkdir(parents=True, exist_ok=True)
    save_dataset(t.s1, args.out / "s1.csv")
    save_dataset(t.s2, args.out / "s2.csv")
    (args.out / "weights.json").write_text(dump_json(
        {"phi1": t.phi1.tolist(), "phi2": t.phi2.tolist(), "trial": args.trial,
         "seed": cfg.seed}))
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    cfg = replace(cfg, **_overrides(args))
    dims = _ints(args.dims) if args.dims else [cfg.total_dims]
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    summaries = {}
    all_trials = {}
    for total in dims:
        c = replace(cfg, noise_dims=total - cfg.signal_dims)
        log.info("running %d trials at %d dims", c.num_trials, total)
        res = run_experiment(c)
        rows.append(trials_csv(res.trials, total))
        summaries[str(total)] = res.summary
        all_trials[str(total)] = trials_json(res.trials)
    header, *_ = rows[0].splitlines(keepends=True)
    body = "".join(r.split("\n", 1)[1] for r in rows)
    (args.out / "trials.csv").write_text(header + body)
    (args.out / "summary.json").write_text(dump_json({"by_dims": summaries}))
    (args.out / "trials.json").write_text(dump_json(all_trials))
    return 0


def cmd_gap(args) -> int:
    report = compute_gap(_floats(args.phi1), _floats(args.phi2))
    text = dump_json(report.to_dict())
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_cluster(args) -> int:
    s1 = load_dataset(args.s1, "1")
    s2 = load_dataset(args.s2, "2")
    if s1.dim != s2.dim:
        raise ValueError(f"datasets have dimensions {s1.dim} and {s2.dim}")
    seed = 0 if args.seed is None else args.seed
    tau = 0.1 if args.tau is None else args.tau
    dcfg = DSCConfig(tau=tau, min_points_per_side=args.min_points,
                     max_splits=4 * args.k, oracle_config=TrainingConfig(max_depth=args.max_depth))
    labels = cluster_labels(args.algorithm, s1, s2, args.k, RngHandle(seed),
                            args.target_dim, args.restarts, dcfg)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "index", "cluster"])
        for i, c in enumerate(labels):
            sample, idx = ("1", i) if i < len(s1) else ("2", i - len(s1))
            w.writerow([sample, idx, int(c)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multisample", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write the two samples of one synthetic trial")
    g.add_argument("--config", type=Path)
    g.add_argument("--trial", type=int, default=0)
    g.add_argument("--dims", type=int, default=None, help="total dimension (signal + noise)")
    g.add_argument("--points", type=int, default=None)
    _add_common(g, trials=False)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run the synthetic comparison")
    r.add_argument("--config", type=Path, help="JSON or TOML experiment config")
    r.add_argument("--dims", default=None, help="comma-separated total dimensions")
    r.add_argument("--points", type=int, default=None)
    r.add_argument("--workers", type=int, default=None)
    _add_common(r)
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("gap", help="gap between two mixing-weight vectors")
    q.add_argument("--phi1", required=True)
    q.add_argument("--phi2", required=True)
    q.add_argument("--out", type=Path, default=None)
    q.set_defaults(func=cmd_gap)

    c = sub.add_parser("cluster", help="cluster two CSV samples with one algorithm")
    c.add_argument("s1", type=Path)
    c.add_argument("s2", type=Path)
    c.add_argument("--algorithm", choices=ALGORITHMS, default="dsc")
    c.add_argument("-k", type=int, default=3)
    c.add_argument("--target-dim", type=int, default=1)
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--max-depth", type=int, default=6)
    c.add_argument("--min-points", type=int, default=20)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--tau", type=float, default=None)
    c.add_argument("--out", type=Path, required=True)
    c.set_defaults(func=cmd_cluster)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
