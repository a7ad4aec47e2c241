"""Mutation-tuning clip zeta on pendulum ESAC: mean normalized final validation return per value."""

import argparse
from pathlib import Path

import numpy as np

from esac.benchmarks import packaged_config
from esac.experiments import sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--values", default="1e-4,1e-3,1e-2,1e-1,1")
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/zeta_sweep/sweep.csv"))
    args = ap.parse_args()
    values = [float(v) for v in args.values.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    cfg = packaged_config("pendulum_esac").replace(workers=args.workers)
    rows = sweep(cfg, "zeta", values, seeds, progress=lambda v, s, r: print(f"zeta={v:g} seed={s}: {r:.1f}"))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, args.out)
    for v in values:
        norm = [r.normalized for r in rows if r.value == v]
        print(f"zeta={v:g}: {np.mean(norm):.3f} +- {np.std(norm):.3f}")


if __name__ == "__main__":
    main()
