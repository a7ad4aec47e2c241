"""ESAC against a random-action baseline on pendulum and pointmass-sparse, plus winner-fitness trend."""

import argparse

from esac.benchmarks import esac_runs, learning_sanity, winner_improvement


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--envs", default="pendulum,pointmass")
    args = ap.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]
    for name in args.envs.split(","):
        config = f"{name}_esac"
        runs = esac_runs(config, seeds)
        res = learning_sanity(config, runs)
        for s in seeds:
            mean, std = res.baselines[s]
            print(f"{res.env} seed {s}: final validation {res.final_returns[s]:.1f}, "
                  f"random {mean:.1f} +- {std:.1f}, threshold {res.threshold(s):.1f}")
        print(f"{res.env}: {res.passes}/{len(seeds)} seeds above threshold")
        if name == "pendulum":
            w = winner_improvement(runs)
            print(f"pendulum winner fitness non-decreasing between SAC phases: {w.per_seed}, "
                  f"mean {w.mean_fraction:.2f}")


if __name__ == "__main__":
    main()
