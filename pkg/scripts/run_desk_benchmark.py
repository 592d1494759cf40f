"""Synthetic comparison of the five pipelines over several dimensions.

    python scripts/run_desk_benchmark.py --config configs/skewed.toml --dims 100,400,1600
"""
import argparse
import dataclasses
import sys
import time
from pathlib import Path

from multisample.bench import ExperimentConfig, run_experiment, win_fraction
from multisample.bench.experiment import dump_json, trials_csv


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--config", type=Path, default=Path("configs/skewed.toml"))
    p.add_argument("--dims", default="100,400,1600")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("results/desk"))
    args = p.parse_args(argv)

    cfg = ExperimentConfig.from_file(args.config)
    if args.trials:
        cfg = dataclasses.replace(cfg, num_trials=args.trials)
    args.out.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for dims in (int(d) for d in args.dims.split(",")):
        c = dataclasses.replace(cfg, noise_dims=dims - cfg.signal_dims, workers=args.workers)
        t0 = time.perf_counter()
        res = run_experiment(c)
        s = res.summary
        summaries[str(dims)] = s
        (args.out / f"trials_{dims}.csv").write_text(trials_csv(res.trials, dims))
        print(f"dims={dims}  ({time.perf_counter() - t0:.1f}s)")
        print("  mean accuracy: " + ", ".join(f"{a}={v:.3f}" for a, v in s["mean_accuracy"].items()))
        for a in ("msp", "dsc"):
            for b in c.algorithms:
                if a != b and a in c.algorithms:
                    print(f"  {a:>4} beats {b:<11} {win_fraction(s, a, b):.2f}"
                          f"  p={s['sign_test_p'][a][b]:.1e}")
    (args.out / "summary.json").write_text(dump_json({"by_dims": summaries}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
