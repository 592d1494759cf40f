"""How often DSC eps-clusters interval mixtures, as a function of the gap
and the sample size. Reports tree shapes and stop reasons per setting.

    python scripts/dsc_scale_study.py --seeds 50
"""
import argparse
import collections
import sys

import numpy as np

from multisample.core import Dataset, IntervalComponent, MixtureSpec, RngHandle
from multisample.dsc import DSCConfig, build_tree, epsilon_clusters
from multisample.theory import compute_gap, discrete_dsc_simulate

SETTINGS = {
    "weak-gap": ((0.4, 0.3, 0.3), (0.5, 0.1, 0.4)),
    "wide-gap": ((0.7, 0.2, 0.1), (0.1, 0.4, 0.5)),
    "two-comp": ((0.7, 0.3), (0.3, 0.7)),
}


def study(phi1, phi2, n, seeds, eps, **cfg_kw):
    K = len(phi1)
    spec = MixtureSpec([phi1, phi2], [IntervalComponent(2 * i, 2 * i + 1) for i in range(K)])
    cfg = DSCConfig.for_weights(phi1, phi2, **cfg_kw)
    ok_count, leaves, reasons = 0, collections.Counter(), collections.Counter()
    for seed in range(seeds):
        a, b = discrete_dsc_simulate(spec, n, n, RngHandle(seed))
        tree = build_tree(a, b, cfg, RngHandle(seed, 1))
        ta, tb = discrete_dsc_simulate(spec, n, n, RngHandle(seed, 2))
        test = Dataset(np.vstack([ta.points, tb.points]),
                       labels=np.concatenate([ta.labels, tb.labels]))
        ok, _ = epsilon_clusters(tree, test, eps)
        ok_count += ok
        leaves[tree.num_leaves] += 1
        reasons.update(l.stop_reason for l in tree.leaves())
    return cfg.tau, ok_count, dict(sorted(leaves.items())), dict(reasons)


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--sizes", default="5000,20000,100000")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--max-depth", type=int, default=None)
    args = p.parse_args(argv)
    kw = {}
    if args.max_depth is not None:
        from multisample.oracle import TrainingConfig
        kw["oracle_config"] = TrainingConfig(max_depth=args.max_depth)
    for name, (phi1, phi2) in SETTINGS.items():
        g = compute_gap(phi1, phi2).gap
        for n in (int(s) for s in args.sizes.split(",")):
            tau, ok, leaves, reasons = study(phi1, phi2, n, args.seeds, args.eps, **kw)
            print(f"{name:<9} g={g:.4f} tau={tau:.5f} n={n:<7} "
                  f"eps-clusters {ok}/{args.seeds}  leaves {leaves}  stops {reasons}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
