"""Experiment configuration: defaults, `key = value` files, env overrides.

Config files are line-oriented text with dotted keys and `#` comments.
Every key can also be overridden through the environment as
IABSIM_<SECTION>__<FIELD> (dots become double underscores, upper-cased).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .dqn import EpsilonSchedule, TrainConfig
from .errors import ConfigurationError
from .network import ScenarioConfig

ENV_PREFIX = "IABSIM_"


@dataclass(frozen=True)
class AgentSettings:
    alpha: float
    gamma: float
    batch_size: int
    target_sync: int
    episodes: int
    epsilon0: float
    epsilon_decay: float
    epsilon_min: float
    hidden_layers: int = 2
    max_links: int = 32

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.alpha,
            discount=self.gamma,
            batch_size=self.batch_size,
            target_sync_interval=self.target_sync,
            episodes=self.episodes,
            seed=seed,
        )

    def epsilon_schedule(self) -> EpsilonSchedule:
        return EpsilonSchedule(self.epsilon0, self.epsilon_decay, self.epsilon_min)


SCHEDULER_DEFAULTS = AgentSettings(
    alpha=0.001,
    gamma=0.99,
    batch_size=32,
    target_sync=2,
    episodes=1000,
    epsilon0=0.9,
    epsilon_decay=0.995,
    epsilon_min=0.01,
    hidden_layers=2,
    max_links=32,
)

# Allocator presets: 1 = deep/slow-decay long run, 2 = shallow fast-decay short run.
ALLOCATOR_PRESETS = {
    1: AgentSettings(
        alpha=0.0001, gamma=0.99, batch_size=64, target_sync=2, episodes=500,
        epsilon0=0.99, epsilon_decay=0.99, epsilon_min=0.01, hidden_layers=2,
    ),
    2: AgentSettings(
        alpha=0.0001, gamma=0.99, batch_size=64, target_sync=2, episodes=21,
        epsilon0=0.99, epsilon_decay=0.01, epsilon_min=0.01, hidden_layers=1,
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    scheduler: AgentSettings = SCHEDULER_DEFAULTS
    allocator: AgentSettings = ALLOCATOR_PRESETS[2]
    train_seed: int = 1
    eval_seed: int = 9001
    output_dir: str = "out"

    def validate(self) -> None:
        self.scenario.validate()
        for name, agent in (("scheduler", self.scheduler), ("allocator", self.allocator)):
            if agent.alpha <= 0 or not 0 <= agent.gamma <= 1:
                raise ConfigurationError(f"{name}: need alpha > 0 and gamma in [0,1]")
            if agent.batch_size < 1 or agent.target_sync < 1 or agent.episodes < 1:
                raise ConfigurationError(f"{name}: batch/sync/episodes must be positive")
            if not 0 <= agent.epsilon_min <= agent.epsilon0:
                raise ConfigurationError(f"{name}: need 0 <= epsilon_min <= epsilon0")
            if not 0 <= agent.epsilon_decay <= 1:
                raise ConfigurationError(f"{name}: epsilon_decay must lie in [0,1]")
            if agent.hidden_layers < 1:
                raise ConfigurationError(f"{name}: hidden_layers must be at least 1")
        if self.scheduler.max_links < self.scenario.num_bs + self.scenario.num_ue:
            raise ConfigurationError("scheduler.max_links below the candidate link count")
        for seed in (self.train_seed, self.eval_seed):
            if not 0 <= seed < 2**64:
                raise ConfigurationError("seeds must fit in 64 bits")


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


_KEYS: dict[str, tuple[str, str, type]] = {
    "scenario.num_bs": ("scenario", "num_bs", int),
    "scenario.num_ue": ("scenario", "num_ue", int),
    "scenario.antennas_per_bs": ("scenario", "antennas_per_bs", int),
    "scenario.cap_mb": ("scenario", "cap_mb", int),
    "scheduler.alpha": ("scheduler", "alpha", float),
    "scheduler.gamma": ("scheduler", "gamma", float),
    "scheduler.batch_size": ("scheduler", "batch_size", int),
    "scheduler.target_sync": ("scheduler", "target_sync", int),
    "scheduler.episodes": ("scheduler", "episodes", int),
    "scheduler.epsilon0": ("scheduler", "epsilon0", float),
    "scheduler.epsilon_decay": ("scheduler", "epsilon_decay", float),
    "scheduler.epsilon_min": ("scheduler", "epsilon_min", float),
    "scheduler.max_links": ("scheduler", "max_links", int),
    "allocator.alpha": ("allocator", "alpha", float),
    "allocator.gamma": ("allocator", "gamma", float),
    "allocator.batch_size": ("allocator", "batch_size", int),
    "allocator.target_sync": ("allocator", "target_sync", int),
    "allocator.episodes": ("allocator", "episodes", int),
    "allocator.epsilon0": ("allocator", "epsilon0", float),
    "allocator.epsilon_decay": ("allocator", "epsilon_decay", float),
    "allocator.epsilon_min": ("allocator", "epsilon_min", float),
    "allocator.hidden_layers": ("allocator", "hidden_layers", int),
    "seeds.train": ("", "train_seed", int),
    "seeds.eval": ("", "eval_seed", int),
    "output.dir": ("", "output_dir", str),
}


def _get(cfg: ExperimentConfig, key: str):
    section, attr, _ = _KEYS[key]
    holder = getattr(cfg, section) if section else cfg
    return getattr(holder, attr)


def _set(cfg: ExperimentConfig, key: str, raw: str) -> ExperimentConfig:
    section, attr, typ = _KEYS[key]
    try:
        value = typ(raw) if typ is not str else raw
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc
    if section:
        holder = replace(getattr(cfg, section), **{attr: value})
        return replace(cfg, **{section: holder})
    return replace(cfg, **{attr: value})


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"{key} = {_get(cfg, key)}" for key in _KEYS]
    return "\n".join(lines) + "\n"


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base if base is not None else default_config()
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {line_no}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigurationError(f"line {line_no}: unknown key {key!r}")
        cfg = _set(cfg, key, value.strip())
    return cfg


def _env_name(key: str) -> str:
    return ENV_PREFIX + key.replace(".", "__").upper()


def apply_env_overrides(cfg: ExperimentConfig, environ) -> ExperimentConfig:
    for key in _KEYS:
        value = environ.get(_env_name(key))
        if value is not None:
            cfg = _set(cfg, key, value)
    return cfg


def load_config(path: str | None, environ=None) -> ExperimentConfig:
    """File values over defaults, env overrides over both, then validation."""
    cfg = default_config()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        cfg = parse_config(text, cfg)
    if environ is not None:
        cfg = apply_env_overrides(cfg, environ)
    cfg.validate()
    return cfg
