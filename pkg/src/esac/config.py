"""Run configuration: a flat ``key = value`` text format with dotted section prefixes.

Grammar, one entry per line::

    # comment (also allowed after a value)
    run.env = pendulum
    es.population = 50
    es.hidden = 64, 64

Blank lines are ignored.  Keys must be unique and known (see ``KEYS``);
omitted keys keep their defaults.  Strings may be quoted with ``"`` or ``'``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .envs import ENVIRONMENTS
from .orchestrator import ConfigError, ESACConfig

ALGORITHMS = ("esac", "es", "sac")


@dataclass
class RunConfig:
    env: str = "pendulum"
    algorithm: str = "esac"
    seed: int = 0
    generations: int = 100  # es / esac budget
    env_steps: int = 20_000  # sac budget
    validate_every: int = 5  # generations (es, esac) or episodes (sac)
    validation_episodes: int = 10
    checkpoint_every: int = 0  # 0: final checkpoint only
    out: str = "runs/default"
    workers: int = 1
    esac: ESACConfig = field(default_factory=ESACConfig)

    def validate(self) -> None:
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"run.env: unknown environment {self.env!r}; choose from {sorted(ENVIRONMENTS)}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"run.algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.seed < 0:
            raise ConfigError("run.seed must be >= 0")
        if self.generations < 0 or self.env_steps < 0:
            raise ConfigError("run.generations and run.env_steps must be >= 0")
        if self.validate_every < 1 or self.validation_episodes < 1:
            raise ConfigError("run.validate_every and run.validation_episodes must be >= 1")
        if self.checkpoint_every < 0:
            raise ConfigError("run.checkpoint_every must be >= 0")
        if self.workers < 1:
            raise ConfigError("run.workers must be >= 1")
        if not self.esac.hidden_dims or any(h < 1 for h in self.esac.hidden_dims):
            raise ConfigError("es.hidden needs at least one positive layer width")
        self.esac.validate()

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


# dotted key -> (owner path from RunConfig, attribute)
KEYS: dict[str, tuple[tuple[str, ...], str]] = {
    "run.env": ((), "env"),
    "run.algorithm": ((), "algorithm"),
    "run.seed": ((), "seed"),
    "run.generations": ((), "generations"),
    "run.env_steps": ((), "env_steps"),
    "run.validate_every": ((), "validate_every"),
    "run.validation_episodes": ((), "validation_episodes"),
    "run.checkpoint_every": ((), "checkpoint_every"),
    "run.out": ((), "out"),
    "run.workers": ((), "workers"),
    "es.population": (("esac",), "population"),
    "es.sigma": (("esac",), "sigma"),
    "es.alpha": (("esac",), "alpha_es"),
    "es.winner_fraction": (("esac",), "winner_fraction"),
    "es.episodes_per_offspring": (("esac",), "episodes_per_offspring"),
    "es.hidden": (("esac",), "hidden_dims"),
    "esac.gradient_interval": (("esac",), "gradient_interval"),
    "esac.p_sac_initial": (("esac",), "p_sac_initial"),
    "esac.p_sac_decay": (("esac",), "p_sac_decay"),
    "esac.sac_episodes": (("esac",), "sac_episodes_per_phase"),
    "esac.swap_prob": (("esac",), "crossover_swap_prob"),
    "amt.zeta": (("esac",), "zeta"),
    "sac.gamma": (("esac", "sac"), "gamma"),
    "sac.temperature": (("esac", "sac"), "temperature"),
    "sac.tau": (("esac", "sac"), "tau"),
    "sac.lr": (("esac", "sac"), "lr"),
    "sac.batch_size": (("esac", "sac"), "batch_size"),
    "sac.buffer_capacity": (("esac", "sac"), "buffer_capacity"),
}


def _owner(cfg: RunConfig, path: tuple[str, ...]):
    obj = cfg
    for name in path:
        obj = getattr(obj, name)
    return obj


def _convert(key: str, raw: str, current):
    try:
        if isinstance(current, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, tuple):
            return tuple(int(v) for v in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(current).__name__}") from None
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    return raw


def set_value(cfg: RunConfig, key: str, raw: str) -> None:
    """Assign one textual value by dotted key, converting to the field's type."""
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    path, attr = KEYS[key]
    owner = _owner(cfg, path)
    setattr(owner, attr, _convert(key, raw.strip(), getattr(owner, attr)))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cfg = RunConfig()
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {seen[key]})")
        seen[key] = lineno
        try:
            set_value(cfg, key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def dump_config(cfg: RunConfig) -> str:
    """Inverse of ``parse_config`` for every key in ``KEYS``."""
    lines = []
    for key, (path, attr) in KEYS.items():
        value = getattr(_owner(cfg, path), attr)
        if isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"
