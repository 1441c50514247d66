#!/usr/bin/env python3
"""Predictive-mean marginalization study: estimator spread per test point.

For every test input, the hyper-parameter-marginalized GP prediction is
estimated repeatedly with each requested method at an equal evaluation
budget; the per-point sampling standard deviations are compared and written
to CSV. With --data the covariates+response file is subsampled and
standardized; otherwise the built-in synthetic dataset is used.

Examples:
    python scripts/run_gp_study.py --synthetic --out-dir results/gp
    python scripts/run_gp_study.py --data sarcos.csv --n-train-cap 1000 \
        --n-test 50 --seeds 10 --out-dir results/gp_real
"""

import argparse
import sys
import time
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from cfqmc.gp import (
    GPConfig,
    load_dataset,
    run_prediction_study,
    synthetic_dataset,
    write_prediction_csv,
)
from cfqmc.seeding import rng_for


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", default=None)
    source.add_argument("--synthetic", action="store_true")
    parser.add_argument("--n-test", dest="n_test", type=int, default=20)
    parser.add_argument("--methods", default="QMC,QMC+CF,MC+CF")
    parser.add_argument("--budget", type=int, default=256)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--seed-base", dest="seed_base", type=int, default=0)
    parser.add_argument("--n-train-cap", dest="n_train_cap", type=int, default=1000)
    parser.add_argument("--n-subset", dest="n_subset", type=int, default=100)
    parser.add_argument("--out-dir", dest="out_dir", required=True)
    args = parser.parse_args()

    if args.data:
        data = load_dataset(args.data, args.n_train_cap, args.seed_base)
        rng = rng_for(args.seed_base, "study-test-rows", data.n)
        rows = rng.choice(data.n, size=min(args.n_test, data.n), replace=False)
        test_z = data.covariates[rows]
    else:
        data, test_z = synthetic_dataset(seed=args.seed_base, n_test=args.n_test)
    print(f"training rows: {data.n}, covariates: {data.p}, test points: {len(test_z)}")

    cfg = GPConfig(test_points=test_z, n_subset=min(args.n_subset, data.n))
    methods = tuple(args.methods.split(","))
    start = time.monotonic()
    study = run_prediction_study(data, cfg, methods, args.budget, list(range(args.seeds)))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_prediction_csv(study, out_dir / "predictions.csv", out_dir / "prediction_sd.csv")
    print(f"done in {time.monotonic() - start:.1f}s -> {out_dir}/")

    by_method = defaultdict(list)
    for _, method, sd in study.spread:
        by_method[method].append(sd)
    print(f"{'method':<10}{'median sd':>12}{'mean sd':>12}")
    for method in methods:
        sds = np.asarray(by_method[method])
        print(f"{method:<10}{np.median(sds):>12.3e}{sds.mean():>12.3e}")
    if "QMC+CF" in methods:
        sd_map = {(t, m): s for t, m, s in study.spread}
        for rival in methods:
            if rival == "QMC+CF":
                continue
            wins = sum(
                sd_map[(t, "QMC+CF")] <= sd_map[(t, rival)] for t in range(len(test_z))
            )
            print(f"QMC+CF sd <= {rival} sd at {wins}/{len(test_z)} test points")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
