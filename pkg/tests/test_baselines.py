import pytest
from hypothesis import given
from hypothesis import strategies as st

from pandemic_ge.baselines import (
    BASELINE_KINDS,
    CONSTANT_KINDS,
    BaselineConfig,
    BaselinePolicy,
    schedule_stage,
)
from pandemic_ge.sim import ConfigError, Observation


def obs(infected, n=1000):
    return Observation(infected / n, 0, 0, 0, 1 - infected / n, 0, 0, 0, 0, 1 - infected / n, 0, 0)


def run(kind, infected_by_day):
    p = BaselinePolicy(kind)
    p.reset()
    return [p.act(d, obs(k)) for d, k in enumerate(infected_by_day)]


@pytest.mark.parametrize("kind", CONSTANT_KINDS)
def test_constant(kind):
    assert set(run(kind, range(100))) == {int(kind[1])}


def test_swe():
    stages = run("SWE", [50] * 100)
    assert stages[:3] == [0, 0, 0] and set(stages[3:]) == {1}


def test_fi_schedule_exact():
    t = 7
    stages = run("S0-4-0FI", [0] * t + [12] * (100 - t))
    expected = [0] * t + [4] * 30 + [3] * 5 + [2] * 5 + [1] * 5 + [0] * (100 - t - 45)
    assert stages == expected


def test_gi_schedule_exact():
    t = 3
    stages = run("S0-4-0GI", [0] * t + [10] * (100 - t))
    expected = [0] * t + [4] * 30 + [3] * 10 + [2] * 10 + [1] * 10 + [0] * (100 - t - 60)
    assert stages == expected


def test_plain_lockdown():
    stages = run("S0-4-0", [0, 0, 10] + [10] * 97)
    assert stages == [0, 0] + [4] * 30 + [0] * 68


def test_ita_schedule():
    t = 5
    stages = run("ITA", [0] * t + [20] * (100 - t))
    expected = [0] * t + [1] * 5 + [2] * 5 + [3] * 5 + [4] * 30 + [3] * 10 + [2] * (100 - t - 55)
    assert stages == expected


def test_trigger_threshold_is_ten_observed_people():
    assert run("S0-4-0", [9, 9, 9]) == [0, 0, 0]
    assert run("S0-4-0", [9, 10, 3]) == [0, 4, 4]


def test_trigger_fires_once_and_reset_clears_it():
    p = BaselinePolicy("S0-4-0")
    for d in range(40):
        p.act(d, obs(50))
    assert p.trigger_day == 0 and p.act(40, obs(500)) == 0
    p.reset()
    assert p.trigger_day is None and p.act(0, obs(0)) == 0


@given(st.sampled_from(BASELINE_KINDS), st.integers(0, 120), st.one_of(st.none(), st.integers(0, 120)))
def test_schedule_valid_and_pure(kind, day, trigger):
    s = schedule_stage(kind, day, trigger)
    assert s in range(5)
    assert s == schedule_stage(kind, day, trigger)


@given(st.integers(0, 60))
def test_gradual_relaxation_twice_as_long(t):
    def relax_days(kind):
        days = [schedule_stage(kind, d, t) for d in range(t, t + 200)]
        return sum(1 for s in days[30:] if 0 < s < 4)

    assert relax_days("S0-4-0GI") == 2 * relax_days("S0-4-0FI") == 30


def test_overridable_config():
    cfg = BaselineConfig(trigger_infected=5, ita_ramp_days=2)
    p = BaselinePolicy("ITA", config=cfg)
    assert [p.act(d, obs(5)) for d in range(7)] == [1, 1, 2, 2, 3, 3, 4]
    with pytest.raises(ConfigError):
        BaselineConfig(fast_step_days=0)


def test_unknown_kind():
    with pytest.raises(ValueError):
        BaselinePolicy("S5")
    with pytest.raises(ValueError):
        schedule_stage("NZL", 0, None)
