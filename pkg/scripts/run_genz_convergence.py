#!/usr/bin/env python3
"""Desk-scale convergence study over the test-integrand families.

Runs the plain and surrogate-corrected estimators across dimensions and
smoothness levels with a power-of-two budget grid, then writes the RMSE
table, the fitted log-log slopes, and an SVG with one panel per
(family, dimension).

Examples:
    python scripts/run_genz_convergence.py --out-dir results/genz
    python scripts/run_genz_convergence.py --families gaussian,discontinuous \
        --dims 1,2 --k-values 0,1,2 --replicates 10 --out-dir results/full
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cfqmc.bench import CampaignConfig, emit_csv, format_config, run_campaign
from cfqmc.plotting import emit_svg


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--families", default="gaussian,oscillatory,continuous,discontinuous")
    parser.add_argument("--dims", default="1,2")
    parser.add_argument("--methods", default="QMC,QMC+CF")
    parser.add_argument("--sequence", default="halton-rr-shift")
    parser.add_argument("--k-values", dest="k_values", default="1")
    parser.add_argument("--n-max-pow", dest="n_max_pow", type=int, default=12)
    parser.add_argument("--replicates", type=int, default=10)
    parser.add_argument("--difficulty", type=float, default=7.0)
    parser.add_argument("--seed-base", dest="seed_base", type=int, default=0)
    parser.add_argument("--out-dir", dest="out_dir", required=True)
    args = parser.parse_args()

    cfg = CampaignConfig(
        families=tuple(args.families.split(",")),
        dims=tuple(int(d) for d in args.dims.split(",")),
        methods=tuple(args.methods.split(",")),
        sequence=args.sequence,
        k_values=tuple(int(k) for k in args.k_values.split(",")),
        n_grid=tuple(2**p for p in range(4, args.n_max_pow + 1)),
        replicates=args.replicates,
        difficulty=args.difficulty,
        seed_base=args.seed_base,
    )
    print(format_config(cfg), end="")

    start = time.monotonic()
    table = run_campaign(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    emit_csv(table, out_dir / "convergence.csv")
    emit_svg(table, out_dir / "convergence.svg")
    print(f"\n{len(table.rows)} rows in {time.monotonic() - start:.1f}s -> {out_dir}/")
    print(f"{'family':<15}{'d':>3}{'method':>16}{'k':>3}{'slope':>9}{'resid':>8}")
    for s in table.slopes:
        print(f"{s.family:<15}{s.dim:>3}{s.method:>16}{s.k:>3}{s.slope:>9.3f}{s.residual:>8.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
