"""Daily-step stochastic epidemic model with restriction stages.

Five compartments (susceptible, infected, critical, recovered, dead) evolve
by binomial transitions once per simulated day. The agent picks one of five
restriction stages each day; the stage scales transmission and enters the
reward as an economic penalty. Observations are min-max normalised and
binomially thinned to mimic incomplete testing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple, Sequence

import numpy as np

N_STAGES = 5
MAX_STAGE = N_STAGES - 1


class ConfigError(ValueError):
    """A configuration value violates one of its invariants."""


class ContractError(RuntimeError):
    """The simulator was driven outside its contract (e.g. stepped after done)."""


@dataclass(frozen=True)
class SimConfig:
    population_size: int = 1000
    initial_infected: int = 2
    hospital_capacity: int = 10
    episode_length: int = 100
    # dynamics constants are tuned, not measured: stage 3 keeps the epidemic
    # subcritical, stages 0-2 do not; scripts/check_dynamics.py re-checks them
    stage_transmission_multiplier: tuple[float, ...] = (1.0, 0.8, 0.55, 0.12, 0.08)
    beta: float = 0.6
    p_critical: float = 0.03
    p_death: float = 0.05
    p_death_saturated: float = 0.15
    mean_infectious_days: float = 14.0
    mean_critical_days: float = 10.0
    detection_probability: float = 0.4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "stage_transmission_multiplier", tuple(float(m) for m in self.stage_transmission_multiplier)
        )
        self.validate()

    def validate(self) -> None:
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if not 0 <= self.initial_infected <= self.population_size:
            raise ConfigError("initial_infected must lie in [0, population_size]")
        if self.hospital_capacity < 1:
            raise ConfigError("hospital_capacity must be >= 1")
        if self.episode_length < 1:
            raise ConfigError("episode_length must be >= 1")
        mult = self.stage_transmission_multiplier
        if len(mult) != N_STAGES:
            raise ConfigError(f"stage_transmission_multiplier needs {N_STAGES} values, got {len(mult)}")
        if any(not 0.0 <= m <= 1.0 for m in mult):
            raise ConfigError("stage_transmission_multiplier values must lie in [0, 1]")
        if any(b > a for a, b in zip(mult, mult[1:])):
            raise ConfigError("stage_transmission_multiplier must be non-increasing in stage")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        for name in ("p_critical", "p_death", "p_death_saturated"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.p_death_saturated < self.p_death:
            raise ConfigError("p_death_saturated must be >= p_death")
        if self.mean_infectious_days < 1 or self.mean_critical_days < 1:
            raise ConfigError("mean_infectious_days and mean_critical_days must be >= 1")
        if self.p_critical + 1.0 / self.mean_infectious_days > 1.0:
            raise ConfigError("p_critical + 1/mean_infectious_days must be <= 1")
        if self.p_death_saturated + 1.0 / self.mean_critical_days > 1.0:
            raise ConfigError("p_death_saturated + 1/mean_critical_days must be <= 1")
        if not 0.0 < self.detection_probability <= 1.0:
            raise ConfigError("detection_probability must lie in (0, 1]")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown sim keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stage_transmission_multiplier"] = list(self.stage_transmission_multiplier)
        return d


@dataclass(frozen=True)
class SimState:
    day: int
    susceptible: int
    infected: int
    critical: int
    dead: int
    recovered: int
    cumulative_infected: int
    cumulative_critical: int
    cumulative_dead: int
    cumulative_recovered: int
    stage: int = 0
    daily_infected: int = 0
    daily_recovered: int = 0
    daily_dead: int = 0

    @property
    def never_infected(self) -> int:
        return self.susceptible

    @property
    def total(self) -> int:
        return self.susceptible + self.infected + self.critical + self.dead + self.recovered


class Observation(NamedTuple):
    """Normalised features seen by a policy, in fixed index order 0..11."""

    i_g: float
    r_g: float
    c_g: float
    d_g: float
    n_g: float
    i_d: float
    r_d: float
    c_d: float
    d_d: float
    n_d: float
    l: float
    h: float


FEATURES = Observation._fields


@dataclass(frozen=True)
class StepOutcome:
    observation: Observation
    reward: float
    done: bool
    # logging and plots only; policies must not read it
    state: SimState = field(repr=False)


def reward_of(critical: float, capacity: float, stage: int) -> float:
    """Daily reward: hospital overload penalty plus restriction-stringency penalty."""
    overload = max((critical - capacity) / capacity, 0.0)
    return -0.4 * overload - 0.1 * stage**1.5 / N_STAGES**1.5


def _check_stage(action) -> int:
    stage = int(action)
    if stage != action or not 0 <= stage <= MAX_STAGE:
        raise ValueError(f"invalid stage {action!r}; expected an integer in 0..{MAX_STAGE}")
    return stage


def initial_state(config: SimConfig) -> SimState:
    n0 = config.initial_infected
    return SimState(
        day=0,
        susceptible=config.population_size - n0,
        infected=n0,
        critical=0,
        dead=0,
        recovered=0,
        cumulative_infected=n0,
        cumulative_critical=0,
        cumulative_dead=0,
        cumulative_recovered=0,
    )


def observe(state: SimState, config: SimConfig, rng: np.random.Generator) -> Observation:
    """Noisy, normalised view of ``state``.

    Case counts are binomially thinned by ``detection_probability``; deaths,
    the stage and the saturation flag are exact. The never-infected share is
    derived from the observed cumulative infections, so undetected cases make
    it read high.
    """
    n = config.population_size
    q = config.detection_probability

    def thin(k: int) -> int:
        return k if q >= 1.0 else int(rng.binomial(k, q))

    seen_infected = thin(state.cumulative_infected)
    seen_recovered = thin(state.cumulative_recovered)
    seen_critical = thin(state.cumulative_critical)
    seen_daily_infected = thin(state.daily_infected)
    seen_daily_recovered = thin(state.daily_recovered)
    seen_current_critical = thin(state.critical)
    never = (n - seen_infected) / n
    return Observation(
        i_g=seen_infected / n,
        r_g=seen_recovered / n,
        c_g=seen_critical / n,
        d_g=state.cumulative_dead / n,
        n_g=never,
        i_d=seen_daily_infected / n,
        r_d=seen_daily_recovered / n,
        c_d=seen_current_critical / n,
        d_d=state.daily_dead / n,
        n_d=never,
        l=state.stage / MAX_STAGE,
        h=1.0 if state.critical > config.hospital_capacity else 0.0,
    )


def reset(config: SimConfig, episode_seed: int) -> tuple[SimState, Observation]:
    """Day-0 state and its observation; identical seeds give identical results."""
    state = initial_state(config)
    return state, observe(state, config, np.random.default_rng(episode_seed))


def step(state: SimState, action: int, rng: np.random.Generator, config: SimConfig) -> StepOutcome:
    """Advance one day under restriction stage ``action``.

    Transitions are computed from the start-of-day compartments; the draw
    order is fixed (infections, infected->critical, infected->recovered,
    critical->dead, critical->recovered, then the observation).
    """
    if state.day >= config.episode_length:
        raise ContractError(f"episode already finished at day {state.day}")
    stage = _check_stage(action)
    n = config.population_size

    pressure = config.beta * config.stage_transmission_multiplier[stage] * state.infected / n
    new_infected = int(rng.binomial(state.susceptible, 1.0 - math.exp(-pressure)))

    p_c = config.p_critical
    p_r = 1.0 / config.mean_infectious_days
    to_critical = int(rng.binomial(state.infected, p_c))
    to_recovered = int(rng.binomial(state.infected - to_critical, p_r / (1.0 - p_c))) if p_c < 1 else 0

    saturated = state.critical > config.hospital_capacity
    p_d = config.p_death_saturated if saturated else config.p_death
    p_cr = 1.0 / config.mean_critical_days
    deaths = int(rng.binomial(state.critical, p_d))
    critical_recovered = int(rng.binomial(state.critical - deaths, p_cr / (1.0 - p_d))) if p_d < 1 else 0

    recovered_today = to_recovered + critical_recovered
    nxt = SimState(
        day=state.day + 1,
        susceptible=state.susceptible - new_infected,
        infected=state.infected + new_infected - to_critical - to_recovered,
        critical=state.critical + to_critical - deaths - critical_recovered,
        dead=state.dead + deaths,
        recovered=state.recovered + recovered_today,
        cumulative_infected=state.cumulative_infected + new_infected,
        cumulative_critical=state.cumulative_critical + to_critical,
        cumulative_dead=state.cumulative_dead + deaths,
        cumulative_recovered=state.cumulative_recovered + recovered_today,
        stage=stage,
        daily_infected=new_infected,
        daily_recovered=recovered_today,
        daily_dead=deaths,
    )
    reward = reward_of(nxt.critical, config.hospital_capacity, stage)
    return StepOutcome(
        observation=observe(nxt, config, rng),
        reward=reward,
        done=nxt.day == config.episode_length,
        state=nxt,
    )


class Epidemic:
    """Stateful episode runner around :func:`reset` / :func:`step`.

    Each instance owns its RNG stream, so instances can run in parallel.
    """

    def __init__(self, config: SimConfig | None = None):
        self.config = config or SimConfig()
        self.state: SimState | None = None
        self.observation: Observation | None = None
        self.rng: np.random.Generator | None = None

    def reset(self, seed: int) -> Observation:
        self.rng = np.random.default_rng(seed)
        self.state = initial_state(self.config)
        self.observation = observe(self.state, self.config, self.rng)
        return self.observation

    def step(self, action: int) -> StepOutcome:
        if self.state is None:
            raise ContractError("reset() must be called before step()")
        out = step(self.state, action, self.rng, self.config)
        self.state = out.state
        self.observation = out.observation
        return out

    @property
    def done(self) -> bool:
        return self.state is not None and self.state.day >= self.config.episode_length


TRAJECTORY_COLUMNS = (
    "day",
    "stage",
    "reward",
    "cumulative_reward",
    "infected",
    "critical",
    "dead",
    "recovered",
    "never_infected",
) + tuple(f"obs_{name}" for name in FEATURES)


def trajectory_row(outcome: StepOutcome, stage: int, cumulative_reward: float) -> dict:
    s = outcome.state
    row = {
        "day": s.day,
        "stage": stage,
        "reward": outcome.reward,
        "cumulative_reward": cumulative_reward,
        "infected": s.infected,
        "critical": s.critical,
        "dead": s.dead,
        "recovered": s.recovered,
        "never_infected": s.never_infected,
    }
    row.update({f"obs_{k}": v for k, v in outcome.observation._asdict().items()})
    return row


def write_trajectory_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRAJECTORY_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
