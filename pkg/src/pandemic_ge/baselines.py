"""Hand-crafted and government-style comparison policies.

Triggered schedules start at stage 0 and fire once the observed cumulative
number of infected people reaches a threshold; after that the stage is a
pure function of days elapsed since the trigger.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .sim import ConfigError, Observation

CONSTANT_KINDS = ("S0", "S1", "S2", "S3", "S4")
SCHEDULE_KINDS = ("S0-4-0", "S0-4-0FI", "S0-4-0GI", "ITA")
BASELINE_KINDS = CONSTANT_KINDS + SCHEDULE_KINDS + ("SWE",)


@dataclass(frozen=True)
class BaselineConfig:
    trigger_infected: int = 10
    lockdown_days: int = 30
    fast_step_days: int = 5
    gradual_step_days: int = 10
    ita_ramp_days: int = 5
    ita_hold_days: int = 30
    ita_relax_days: int = 10
    ita_floor_stage: int = 2
    swe_open_days: int = 3

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ConfigError(f"{f.name} must be >= 0")
        if min(self.fast_step_days, self.gradual_step_days, self.ita_ramp_days, self.ita_relax_days) < 1:
            raise ConfigError("step lengths must be >= 1 day")
        if self.ita_floor_stage > 4:
            raise ConfigError("ita_floor_stage must lie in 0..4")

    @classmethod
    def from_dict(cls, d: dict) -> "BaselineConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown baselines keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def lockdown_then_relax(k: int, lockdown_days: int, step_days: int | None) -> int:
    """Stage ``k`` days after the trigger: 4 for the lockdown, then down one stage per step."""
    if k < lockdown_days:
        return 4
    if step_days is None:
        return 0
    return max(0, 3 - (k - lockdown_days) // step_days)


def italy_like(k: int, cfg: BaselineConfig) -> int:
    """Stage 1 at the trigger, up one per ramp step to 4, hold, then down to the floor."""
    ramp_end = 3 * cfg.ita_ramp_days
    if k < ramp_end:
        return 1 + k // cfg.ita_ramp_days
    if k < ramp_end + cfg.ita_hold_days:
        return 4
    return max(cfg.ita_floor_stage, 3 - (k - ramp_end - cfg.ita_hold_days) // cfg.ita_relax_days)


def schedule_stage(kind: str, day: int, trigger_day: int | None, cfg: BaselineConfig = BaselineConfig()) -> int:
    """Stage of a baseline on ``day`` given when (if ever) its trigger fired."""
    if kind in CONSTANT_KINDS:
        return int(kind[1])
    if kind == "SWE":
        return 0 if day < cfg.swe_open_days else 1
    if kind not in SCHEDULE_KINDS:
        raise ValueError(f"unknown baseline {kind!r}; choose from {BASELINE_KINDS}")
    if trigger_day is None or day < trigger_day:
        return 0
    k = day - trigger_day
    if kind == "ITA":
        return italy_like(k, cfg)
    step = {"S0-4-0": None, "S0-4-0FI": cfg.fast_step_days, "S0-4-0GI": cfg.gradual_step_days}[kind]
    return lockdown_then_relax(k, cfg.lockdown_days, step)


class BaselinePolicy:
    """Stateful per-episode wrapper: watches observations for the trigger."""

    def __init__(self, kind: str, population_size: int = 1000, config: BaselineConfig = BaselineConfig()):
        if kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline {kind!r}; choose from {BASELINE_KINDS}")
        self.kind = kind
        self.name = kind
        self.population_size = population_size
        self.config = config
        self.trigger_day: int | None = None

    def reset(self) -> None:
        self.trigger_day = None

    def observed_infected(self, obs: Observation) -> int:
        return round(obs.i_g * self.population_size)

    def act(self, day: int, obs: Observation) -> int:
        if day < 0:
            raise ValueError("day must be >= 0")
        if (
            self.trigger_day is None
            and self.kind in SCHEDULE_KINDS
            and self.observed_infected(obs) >= self.config.trigger_infected
        ):
            self.trigger_day = day
        return schedule_stage(self.kind, day, self.trigger_day, self.config)


def make_baseline(kind: str, population_size: int = 1000, config: BaselineConfig = BaselineConfig()) -> BaselinePolicy:
    return BaselinePolicy(kind, population_size, config)
