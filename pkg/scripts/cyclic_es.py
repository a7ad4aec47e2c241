"""Plain ES on the cyclic MDP: first generation whose validation return is +2000, per seed.

Usage:
    python scripts/cyclic_es.py --seeds 0,1,2 --generations 100
"""

import argparse

from esac.benchmarks import cyclic_es


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--generations", type=int, default=100)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]
    res = cyclic_es(seeds, args.generations, args.workers)
    for s, g in zip(seeds, res.solved_at):
        print(f"seed {s}: " + (f"solved at generation {g} ({g * 50} episodes)" if g else "not solved"))
    print(f"{res.successes}/{len(seeds)} seeds solved within {args.generations} generations")


if __name__ == "__main__":
    main()
