"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .config import RunConfig, dump_config, load_config
from .experiments import compare_updates, sweep, write_sweep_csv, write_updates_csv
from .orchestrator import ConfigError
from .parallel import measure_scaling, write_timing_csv
from .train import train

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esac", description="ESAC training and benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", type=Path, help="key = value config file (defaults if omitted)")
        p.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
        p.add_argument("--workers", type=int, help="evaluation processes (overrides run.workers)")
        p.add_argument("--generations", type=int, help="generation budget (overrides run.generations)")
        if out:
            p.add_argument("--out", type=Path, help="output directory (overrides run.out)")

    common(sub.add_parser("train", help="run one training job"))
    p = sub.add_parser("bench-scaling", help="time ES generations across worker counts")
    common(p)
    p.add_argument("--worker-counts", type=_int_list, default=[1, 2, 4])
    p.add_argument("--populations", type=_int_list, default=None, help="defaults to es.population")
    p.add_argument("--warmup", type=int, default=2)
    p = sub.add_parser("sweep", help="final validation return across a hyperparameter sweep")
    common(p)
    p.add_argument("--param", choices=("zeta", "sigma"), required=True)
    p.add_argument("--values", type=_float_list, required=True)
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2])
    common(sub.add_parser("compare-updates", help="gradient updates of ESAC vs SAC at matched env steps"))
    common(sub.add_parser("validate-config", help="parse and validate a config, print the resolved values"),
           out=False)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config is not None else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.generations is not None:
        cfg.generations = args.generations
    if getattr(args, "out", None) is not None:
        cfg.out = str(args.out)
    cfg.validate()
    return cfg


def cmd_train(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    result = train(cfg, out, on_record=_progress(cfg))
    print(json.dumps(result.summary))
    return EXIT_OK


def _progress(cfg: RunConfig):
    def show(rec):
        if rec.get("validation") is not None:
            step = rec.get("generation", rec.get("episode"))
            print(f"[{cfg.algorithm} {cfg.env} seed={cfg.seed}] {step}: validation {rec['validation']:.2f} "
                  f"env_steps {rec['env_steps']} updates {rec['total_gradient_updates']}", file=sys.stderr)
    return show


def cmd_bench_scaling(cfg: RunConfig, worker_counts, populations, warmup: int) -> int:
    if not worker_counts or min(worker_counts) < 1:
        raise ConfigError("--worker-counts needs positive integers")
    populations = populations or [cfg.esac.population]
    if min(populations) < 2:
        raise ConfigError("--populations needs sizes >= 2")
    e = cfg.esac
    samples = measure_scaling(cfg.env, worker_counts, populations, cfg.generations, warmup, e.sigma, e.alpha_es,
                              e.hidden_dims, cfg.seed)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_timing_csv(samples, out / "timing.csv")
    for n in populations:
        rows = [s for s in samples if s.population == n]
        base = next((s for s in rows if s.worker_count == min(worker_counts)), rows[0])
        for s in rows:
            print(f"population {n} workers {s.worker_count}: {s.mean_s:.4f} s/gen (sd {s.std_s:.4f}), "
                  f"speedup {base.mean_s / s.mean_s:.2f}x vs {base.worker_count} worker(s)")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, param: str, values, seeds) -> int:
    def show(v, s, r):
        print(f"{param}={v!r} seed={s}: final validation {r:.2f}", file=sys.stderr)

    rows = sweep(cfg, param, values, seeds, progress=show)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "sweep.csv")
    for v in dict.fromkeys(r.value for r in rows):
        norm = [r.normalized for r in rows if r.value == v]
        print(f"{param}={v!r}: mean normalized return {sum(norm) / len(norm):.4f}")
    return EXIT_OK


def cmd_compare_updates(cfg: RunConfig) -> int:
    rows = compare_updates(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_updates_csv(rows, out / "updates.csv")
    if rows:
        steps, esac_updates, sac_updates = rows[-1]
        ratio = esac_updates / sac_updates if sac_updates else float("nan")
        print(f"at {steps} env steps: ESAC {esac_updates} updates, SAC {sac_updates} updates (ratio {ratio:.3f})")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "validate-config":
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "bench-scaling":
            return cmd_bench_scaling(cfg, args.worker_counts, args.populations, args.warmup)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.param, args.values, args.seeds)
        return cmd_compare_updates(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("interrupted; partial metrics kept", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        traceback.print_exc()
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
