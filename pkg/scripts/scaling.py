"""Wall-clock per ES generation on cyclic-mdp across worker counts and population sizes."""

import argparse
from pathlib import Path

from esac.parallel import measure_scaling, write_timing_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", default="1,2,4")
    ap.add_argument("--populations", default="50")
    ap.add_argument("--generations", type=int, default=20)
    ap.add_argument("--out", type=Path, default=Path("runs/scaling/timing.csv"))
    args = ap.parse_args()
    workers = [int(w) for w in args.workers.split(",")]
    pops = [int(p) for p in args.populations.split(",")]
    samples = measure_scaling("cyclic-mdp", workers, pops, generations=args.generations)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_timing_csv(samples, args.out)
    for s in samples:
        base = next(b for b in samples if b.population == s.population and b.worker_count == workers[0])
        print(f"n={s.population:4d} workers={s.worker_count}: {s.mean_s:.4f} +- {s.std_s:.4f} s/gen, "
              f"{base.mean_s / s.mean_s:.2f}x")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
