"""Cumulative gradient updates of ESAC and plain SAC at matched environment steps on pendulum."""

import argparse
from pathlib import Path

from esac.benchmarks import packaged_config
from esac.config import load_config
from esac.experiments import compare_updates, write_updates_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, help="defaults to the packaged compare_updates config")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/compare_updates/updates.csv"))
    args = ap.parse_args()
    cfg = load_config(args.config) if args.config else packaged_config("compare_updates")
    rows = compare_updates(cfg.replace(seed=args.seed))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_updates_csv(rows, args.out)
    steps, esac_n, sac_n = rows[-1]
    print(f"{steps} env steps: ESAC {esac_n} updates, SAC {sac_n} updates, ratio {esac_n / sac_n:.3f}")


if __name__ == "__main__":
    main()
