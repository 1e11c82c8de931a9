"""Fixed-step thermal house with occupants as activity-driven heat sources.

The house exchanges heat with a heater (relay-controlled by a hysteresis
thermostat), loses heat to the outdoors through an equivalent thermal
resistance, and gains heat from occupants in proportion to their
breathing volume and exhale temperature. All internal physics are SI
(deg C, watts, seconds); Fahrenheit appears only at the set-point API,
matching the thermostat hardware convention.

Also provides the learner-facing views: a single-occupant environment
for timescale-governor training and a multi-occupant system for weight
mediation, both sampling comfort every 6 simulated minutes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .mediator import MediationError, round_setpoint
from .metrics import ComfortConfig, PmvInputs, hvac_performance, pmv
from .qlearn import (
    LearningParams,
    MultisampleResult,
    QTable,
    TimeScales,
    multisample_run,
    q_update,
)

__all__ = [
    "ACTIVITIES",
    "ACTIVITY_RMV",
    "ACTIVITY_MET",
    "NOT_HOME",
    "SETPOINTS_F",
    "HouseParams",
    "ThermalState",
    "OccupantProfile",
    "ThermalInstabilityError",
    "fahrenheit_to_celsius",
    "celsius_to_fahrenheit",
    "sample_activity",
    "occupant_heat_flow",
    "thermostat_command",
    "step_house",
    "outdoor_temperature",
    "HouseSimulation",
    "HvacInnerEnv",
    "HvacGovernorSystem",
    "MultiOccupantHvacSystem",
    "make_occupant",
    "comfort_goodness",
]

NOT_HOME = "not home"

# Ascending breathing volume; "not home" contributes no heat and no votes.
ACTIVITIES: tuple[str, ...] = (
    "sleeping",
    "seated relaxed",
    "standing at rest",
    "standing light activity",
    "light domestic work",
    "standing medium activity",
    "washing dishes standing",
    "running",
    NOT_HOME,
)

# Respiratory minute volume in L/min: about 6 at rest, about 12 at
# moderate exercise, graded monotonically between.
ACTIVITY_RMV: dict[str, float] = {
    "sleeping": 5.0,
    "seated relaxed": 6.0,
    "standing at rest": 7.0,
    "standing light activity": 8.0,
    "light domestic work": 9.0,
    "standing medium activity": 10.0,
    "washing dishes standing": 11.0,
    "running": 12.0,
    NOT_HOME: 0.0,
}

# Metabolic rate in met, standard comfort-engineering figures.
ACTIVITY_MET: dict[str, float] = {
    "sleeping": 0.7,
    "seated relaxed": 1.0,
    "standing at rest": 1.2,
    "standing light activity": 1.6,
    "light domestic work": 1.8,
    "standing medium activity": 2.0,
    "washing dishes standing": 2.5,
    "running": 3.8,
    NOT_HOME: 1.0,
}

# Heat emission constant: watts per (L/min * degC of exhale temperature),
# calibrated so a seated relaxed adult (RMV 6, EBT 34) emits 100 W.
HEAT_FLOW_COEFF = 100.0 / (6.0 * 34.0)

# Indoor conditions assumed constant for comfort evaluation.
INDOOR_AIR_VELOCITY = 0.1
INDOOR_RELATIVE_HUMIDITY = 0.5

# Light bedding worn on top of regular clothing while asleep. Kept thin
# so that winter nights genuinely need a high set-point.
SLEEP_CLO_BONUS = 0.2

# Thermostat set-points available to the inner learner, degF.
SETPOINTS_F: tuple[int, ...] = (70, 72, 74, 76, 78, 80)

# Inner-learner state space: indoor temperature quantized per degF.
TEMP_BUCKET_LOW_F = 60
TEMP_BUCKET_HIGH_F = 80

SAMPLE_PERIOD_S = 360.0  # comfort sampling period (6 minutes)

# Inner comfort learning: gentler rate and exploration than the outer
# agents; window rewards are single noisy comfort readings.
INNER_COMFORT_PARAMS = LearningParams(alpha=0.5, epsilon=0.1)


class ThermalInstabilityError(RuntimeError):
    """Integration produced a room temperature outside the guard band."""


def fahrenheit_to_celsius(f: float) -> float:
    return (f - 32.0) * 5.0 / 9.0


def celsius_to_fahrenheit(c: float) -> float:
    return c * 9.0 / 5.0 + 32.0


@dataclass(frozen=True)
class HouseParams:
    """Thermal constants of the house and its heater.

    The equivalent resistance and air mass correspond to a modest
    single-zone house; together they give a relaxation time of roughly
    forty minutes, so heat-up transients play out over tens of minutes.
    """

    r_eq: float = 1.5585e-3  # degC * s / J
    heater_air_temperature: float = 50.0  # degC
    mass_flow_rate: float = 1.0  # kg/s through the heater
    air_heat_capacity: float = 1005.4  # J / (kg degC)
    indoor_air_mass: float = 1470.0  # kg
    dt: float = 60.0  # integration step, seconds

    def __post_init__(self) -> None:
        for name in ("r_eq", "heater_air_temperature", "mass_flow_rate",
                     "air_heat_capacity", "indoor_air_mass", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class ThermalState:
    t_room: float  # degC
    heater_on: bool
    t_out: float  # degC
    clock: float  # simulated seconds


@dataclass(frozen=True)
class OccupantProfile:
    """One occupant: hourly activity options plus personal constants.

    The schedule has 24 slots; each slot lists the activities the
    occupant may be doing during that hour, one of which is drawn
    uniformly when the hour starts. Stress scales the metabolic rate
    seen by the comfort model without changing breathing volume.
    """

    identifier: str
    schedule: tuple[tuple[str, ...], ...]
    clothing: float
    ebt: float = 34.0  # exhale breath temperature, degC
    stress_met_scale: float = 1.0

    def __post_init__(self) -> None:
        if len(self.schedule) != 24:
            raise ValueError(f"schedule must have 24 slots, got {len(self.schedule)}")
        for hour, slot in enumerate(self.schedule):
            if not slot:
                raise ValueError(f"hour {hour} has an empty candidate set")
            for act in slot:
                if act not in ACTIVITY_RMV:
                    raise ValueError(f"unknown activity {act!r} at hour {hour}")


def sample_activity(profile: OccupantProfile, hour: int, rng: np.random.Generator) -> str:
    """Uniform draw from the hour's candidate activities."""
    if not 0 <= hour <= 23:
        raise ValueError(f"hour {hour} out of range")
    slot = profile.schedule[hour]
    return slot[int(rng.integers(len(slot)))]


def occupant_heat_flow(profile: OccupantProfile, activity: str) -> float:
    """Sensible heat emitted by the occupant, in watts."""
    return HEAT_FLOW_COEFF * ACTIVITY_RMV[activity] * profile.ebt


def thermostat_command(state: ThermalState, setpoint_f: float, band_c: float = 2.5) -> bool:
    """Hysteresis relay around the set-point; holds inside the band."""
    if not 60.0 <= setpoint_f <= 85.0:
        raise ValueError(f"set-point {setpoint_f} degF outside [60, 85]")
    sp = fahrenheit_to_celsius(setpoint_f)
    if state.t_room < sp - band_c:
        return True
    if state.t_room > sp + band_c:
        return False
    return state.heater_on


def step_house(
    state: ThermalState,
    params: HouseParams,
    occupant_flows: Sequence[float],
    heater_on: bool,
) -> ThermalState:
    """One explicit Euler step of the room temperature balance."""
    heater = (params.heater_air_temperature - state.t_room) * params.mass_flow_rate * params.air_heat_capacity if heater_on else 0.0
    losses = (state.t_room - state.t_out) / params.r_eq
    net = heater - losses + sum(occupant_flows)
    t_next = state.t_room + params.dt * net / (params.indoor_air_mass * params.air_heat_capacity)
    if not -30.0 <= t_next <= 60.0:
        raise ThermalInstabilityError(
            f"room temperature {t_next:.2f} degC left the guard band; dt too large?"
        )
    return ThermalState(
        t_room=t_next,
        heater_on=heater_on,
        t_out=state.t_out,
        clock=state.clock + params.dt,
    )


@lru_cache(maxsize=512)
def _daily_offset(seed: int, day: int) -> float:
    return float(np.random.default_rng([seed, day]).uniform(-2.0, 2.0))


def outdoor_temperature(clock: float, seed: int) -> float:
    """Winter outdoor temperature: 10 degC base, daily swing, seeded offset.

    The sinusoid bottoms out at 5 am and peaks at 5 pm with a 3 degC
    amplitude; each day adds a uniform offset in [-2, 2] degC drawn
    deterministically from (seed, day), so the value depends only on
    the clock and the seed.
    """
    day = int(clock // 86400.0)
    hour = (clock % 86400.0) / 3600.0
    return 10.0 + _daily_offset(seed, day) - 3.0 * math.cos(2.0 * math.pi * (hour - 5.0) / 24.0)


# Hourly candidate activities for the three simulated occupants. H1 is
# an early riser who may exercise before work; H2 keeps later hours and
# skips exercise; H3 spends the most time at home.
_H1_SCHEDULE: tuple[tuple[str, ...], ...] = (
    ("sleeping",),) * 6 + (
    ("sleeping", "standing at rest", "running"),
    ("standing light activity",),
) + ((NOT_HOME,),) * 9 + (
    ("standing light activity", "seated relaxed", "standing medium activity"),
    ("seated relaxed", "standing medium activity", "washing dishes standing"),
    ("seated relaxed", "standing medium activity", "washing dishes standing", "light domestic work"),
    ("seated relaxed", "standing at rest"),
    ("seated relaxed",),
    ("sleeping",),
    ("sleeping",),
)

_H2_SCHEDULE: tuple[tuple[str, ...], ...] = (
    ("sleeping",),) * 8 + (
    ("sleeping", "standing at rest"),
    ("sleeping", "standing at rest"),
) + ((NOT_HOME,),) * 9 + (
    ("standing light activity", "seated relaxed", "standing medium activity"),
    ("standing light activity", "seated relaxed", "standing medium activity"),
    ("seated relaxed", "standing medium activity", "washing dishes standing"),
    ("seated relaxed", "standing medium activity", "washing dishes standing"),
    ("seated relaxed", "standing at rest"),
)

_H3_SCHEDULE: tuple[tuple[str, ...], ...] = (
    ("sleeping",),) * 10 + (
    ("sleeping", "standing at rest"),
) + ((NOT_HOME,),) * 4 + (
    ("standing light activity", "standing medium activity"),
    ("seated relaxed", "standing medium activity", "light domestic work"),
    ("seated relaxed", "standing medium activity", "light domestic work"),
    ("standing medium activity", "washing dishes standing"),
    ("standing light activity", "standing medium activity"),
) + (
    ("seated relaxed", "standing at rest", "standing light activity"),
) * 4

_OCCUPANTS: dict[str, OccupantProfile] = {
    "H1": OccupantProfile("H1", _H1_SCHEDULE, clothing=0.4),
    "H2": OccupantProfile("H2", _H2_SCHEDULE, clothing=0.5, stress_met_scale=1.1),
    "H3": OccupantProfile("H3", _H3_SCHEDULE, clothing=0.75),
}


def make_occupant(identifier: str) -> OccupantProfile:
    try:
        return _OCCUPANTS[identifier]
    except KeyError:
        raise ValueError(f"unknown occupant {identifier!r}; choose from {sorted(_OCCUPANTS)}") from None


def comfort_goodness(samples: Sequence[float], theta1: float = 0.7, theta2: float = 0.3) -> float:
    """Window comfort score on [0, 1] (1 = neutral votes throughout)."""
    cfg = ComfortConfig(theta1=theta1, theta2=theta2, window=len(samples))
    return hvac_performance(samples, cfg)


# Score used when the occupant was away for an entire window.
NEUTRAL_COMFORT = 0.5


class HouseSimulation:
    """Shared thermal environment advanced in 6-minute comfort samples.

    Each sample runs six one-minute Euler steps with the thermostat
    relay evaluated before each, resamples activities at hour edges,
    and finally evaluates one comfort vote per present occupant.
    """

    def __init__(
        self,
        occupants: Sequence[OccupantProfile],
        seed: int,
        params: HouseParams = HouseParams(),
        initial_t_room: float = 18.0,
        setpoint_f: float = 72.0,
    ) -> None:
        if not occupants:
            raise ValueError("house needs at least one occupant")
        self.params = params
        self.occupants = list(occupants)
        self.seed = seed
        self.activity_rng = np.random.default_rng([seed, 0x5EA5])
        self.setpoint_f = setpoint_f
        self.state = ThermalState(
            t_room=initial_t_room, heater_on=False,
            t_out=outdoor_temperature(0.0, seed), clock=0.0,
        )
        self._hour = 0
        self.activities: list[str] = [
            sample_activity(p, 0, self.activity_rng) for p in self.occupants
        ]
        self.recorder: list[str] | None = None

    @property
    def steps_per_sample(self) -> int:
        return int(round(SAMPLE_PERIOD_S / self.params.dt))

    def advance_sample(self) -> list[float | None]:
        """Advance one sampling period; per-occupant vote, None if away."""
        for _ in range(self.steps_per_sample):
            hour = int(self.state.clock // 3600.0) % 24
            if hour != self._hour:
                self._hour = hour
                self.activities = [
                    sample_activity(p, hour, self.activity_rng) for p in self.occupants
                ]
            heater_on = thermostat_command(self.state, self.setpoint_f)
            flows = [
                occupant_heat_flow(p, act)
                for p, act in zip(self.occupants, self.activities)
            ]
            self.state = replace(self.state, t_out=outdoor_temperature(self.state.clock, self.seed))
            self.state = step_house(self.state, self.params, flows, heater_on)
        votes = [self._vote(p, act) for p, act in zip(self.occupants, self.activities)]
        if self.recorder is not None:
            acts = ",".join(a.replace(",", ";") for a in self.activities)
            pm = ",".join("" if v is None else repr(v) for v in votes)
            self.recorder.append(
                f"{self.state.clock!r},{self.state.t_room!r},{self.state.t_out!r},"
                f"{int(self.state.heater_on)},{self.setpoint_f!r},{acts},{pm}"
            )
        return votes

    def _vote(self, profile: OccupantProfile, activity: str) -> float | None:
        if activity == NOT_HOME:
            return None
        met = ACTIVITY_MET[activity] * profile.stress_met_scale
        clo = profile.clothing + (SLEEP_CLO_BONUS if activity == "sleeping" else 0.0)
        return pmv(
            PmvInputs(
                air_temperature=self.state.t_room,
                mean_radiant_temperature=self.state.t_room,
                air_velocity=INDOOR_AIR_VELOCITY,
                relative_humidity=INDOOR_RELATIVE_HUMIDITY,
                metabolic_rate=met,
                clothing_insulation=min(clo, 2.0),
            )
        )

    def temp_bucket(self) -> int:
        f = celsius_to_fahrenheit(self.state.t_room)
        f = min(max(f, TEMP_BUCKET_LOW_F), TEMP_BUCKET_HIGH_F)
        return int(round(f)) - TEMP_BUCKET_LOW_F


N_TEMP_BUCKETS = TEMP_BUCKET_HIGH_F - TEMP_BUCKET_LOW_F + 1


class HvacInnerEnv:
    """Single-occupant learner view over a house.

    States combine the quantized indoor temperature with the occupant's
    activity; actions are thermostat set-points. Window rewards and the
    run performance are comfort goodness over the votes collected while
    the occupant was home (neutral when away throughout).
    """

    n_actions = len(SETPOINTS_F)
    n_states = N_TEMP_BUCKETS * len(ACTIVITIES)

    def __init__(self, house: HouseSimulation, occupant_index: int = 0,
                 theta: tuple[float, float] = (0.7, 0.3)) -> None:
        self.house = house
        self.occupant_index = occupant_index
        self.theta = theta
        self._window: list[float] = []
        self._run: list[float] = []
        self._last_performance = NEUTRAL_COMFORT

    def begin_measurement(self) -> None:
        self._run.clear()

    def observe(self) -> int:
        act_idx = ACTIVITIES.index(self.house.activities[self.occupant_index])
        return self.house.temp_bucket() * len(ACTIVITIES) + act_idx

    def apply(self, action: int) -> None:
        self.house.setpoint_f = float(SETPOINTS_F[action])

    def step(self) -> None:
        vote = self.house.advance_sample()[self.occupant_index]
        if vote is not None:
            self._window.append(vote)
            self._run.append(vote)

    def window_reward(self) -> float:
        # Reward is the comfort shortfall (goodness - 1, so always <= 0):
        # against a zero-initialized table this makes untried set-points
        # look best, and the learner sweeps all of them before settling.
        if not self._window:
            return NEUTRAL_COMFORT - 1.0
        r = comfort_goodness(self._window, *self.theta) - 1.0
        self._window.clear()
        return r

    def performance(self) -> float:
        # An all-away measurement carries no new evidence about the
        # set-point policy, so the previous reading is held; this keeps
        # the governor's difference reward quiet overnight absences.
        if not self._run:
            return self._last_performance
        self._last_performance = comfort_goodness(self._run, *self.theta)
        return self._last_performance


class HvacGovernorSystem:
    """Persistent inner learner measured at governor-chosen timescales."""

    def __init__(
        self,
        occupant: OccupantProfile,
        seed: int,
        inner_params: LearningParams | None = None,
        windows_per_measure: int = 1,
        measure_span: int | None = None,
        theta: tuple[float, float] = (0.7, 0.3),
    ) -> None:
        if inner_params is None:
            inner_params = INNER_COMFORT_PARAMS
        self.house = HouseSimulation([occupant], seed=seed)
        self.env = HvacInnerEnv(self.house, theta=theta)
        self.q = QTable(self.env.n_states, self.env.n_actions)
        self.inner_params = inner_params
        self.windows_per_measure = windows_per_measure
        self.measure_span = measure_span
        self.rng = np.random.default_rng([seed, 0x1177])

    def measure(self, t_l: int, t_a: int) -> float:
        # A fixed span (typically whole days) keeps consecutive readings
        # comparable under the daily activity cycle; without one, the
        # measurement covers a window count instead.
        if self.measure_span is not None:
            return self.measure_horizon(t_l, t_a, self.measure_span)
        scales = TimeScales(SAMPLE_PERIOD_S, t_a, t_l)
        self.env.begin_measurement()
        result: MultisampleResult = multisample_run(
            self.env, self.q, scales, self.inner_params,
            self.windows_per_measure * t_l, self.rng,
        )
        return result.performance

    def measure_horizon(self, t_l: int, t_a: int, min_samples: int) -> float:
        """One aggregate measurement spanning at least `min_samples` ticks.

        Horizon-matched across different timescale states, which keeps
        brute-force comparisons fair under the daily activity cycle.
        """
        scales = TimeScales(SAMPLE_PERIOD_S, t_a, t_l)
        windows = max(1, -(-min_samples // t_l))
        self.env.begin_measurement()
        result = multisample_run(
            self.env, self.q, scales, self.inner_params, windows * t_l, self.rng
        )
        return result.performance


@dataclass
class _OccupantStack:
    """Inner learner bookkeeping for one mediated occupant."""

    profile: OccupantProfile
    q: QTable
    t_l: int
    t_a: int
    credited_action: int = 0
    window_state: int = 0
    window_votes: list[float] = field(default_factory=list)
    ticks_in_window: int = 0
    last_home_pref: float | None = None


class MultiOccupantHvacSystem:
    """Full per-human stack over one shared house, driven by a mediator.

    Each occupant keeps a live inner learner (credited with whatever
    set-point the mediator actually applies) and a governor-selected
    (T_l, T_a) pair whose T_a the mediator may override. A mediated
    measurement advances the shared house a fixed number of samples and
    scores each occupant's comfort over the samples they were home for.
    """

    def __init__(
        self,
        occupants: Sequence[OccupantProfile],
        seed: int,
        scales: Sequence[tuple[int, int]] | None = None,
        inner_params: LearningParams | None = None,
        eval_samples: int = 240,
        pretrained: Sequence[QTable] | None = None,
        theta: tuple[float, float] = (0.7, 0.3),
    ) -> None:
        if inner_params is None:
            inner_params = INNER_COMFORT_PARAMS
        self.theta = theta
        self.house = HouseSimulation(list(occupants), seed=seed)
        self.n_humans = len(self.house.occupants)
        self.human_ids = tuple(p.identifier for p in self.house.occupants)
        self.inner_params = inner_params
        self.eval_samples = eval_samples
        self.rng = np.random.default_rng([seed, 0x3ED])
        if scales is None:
            scales = [(10, 4)] * self.n_humans
        self.stacks = [
            _OccupantStack(
                profile=p,
                q=(pretrained[i].copy() if pretrained is not None
                   else QTable(HvacInnerEnv.n_states, HvacInnerEnv.n_actions)),
                t_l=scales[i][0],
                t_a=scales[i][1],
            )
            for i, p in enumerate(self.house.occupants)
        ]
        self.last_action: float | None = None
        self.last_rate: int | None = None
        # every comfort vote seen during mediated measurements, per human
        self.vote_log: list[list[float | None]] = [[] for _ in self.stacks]

    def reset_vote_log(self) -> None:
        self.vote_log = [[] for _ in self.stacks]

    def fast_forward(self, samples: int) -> None:
        """Advance the shared house without learning; resets open windows."""
        for _ in range(samples):
            self.house.advance_sample()
        for i, st in enumerate(self.stacks):
            st.window_votes.clear()
            st.ticks_in_window = 0
            st.window_state = self._observe(i)

    def _observe(self, idx: int) -> int:
        act_idx = ACTIVITIES.index(self.house.activities[idx])
        return self.house.temp_bucket() * len(ACTIVITIES) + act_idx

    def preferred_actions(self) -> list[float]:
        """Current greedy set-point per human.

        While a human is away their most recent at-home preference is
        held, so mediation weights on absent humans still express what
        that human last wanted rather than a meaningless table row.
        """
        prefs = []
        for i, st in enumerate(self.stacks):
            if self.house.activities[i] == NOT_HOME and st.last_home_pref is not None:
                prefs.append(st.last_home_pref)
                continue
            a = int(np.argmax(st.q.values[self._observe(i)]))
            pref = float(SETPOINTS_F[a])
            st.last_home_pref = pref
            prefs.append(pref)
        return prefs

    def actuation_rates(self) -> list[int]:
        return [st.t_a for st in self.stacks]

    def echo_action(self, action: float) -> None:
        self.last_action = action
        idx = int(np.argmin([abs(action - sp) for sp in SETPOINTS_F]))
        for st in self.stacks:
            st.credited_action = idx

    def echo_rate(self, rate: int) -> None:
        self.last_rate = rate
        for st in self.stacks:
            st.t_a = rate

    def run_mediated(self, action: float, rate: int) -> list[float | None]:
        setpoint = float(round_setpoint(action))  # HVAC accepts whole degrees
        self.house.setpoint_f = setpoint
        collected: list[list[float]] = [[] for _ in self.stacks]
        for i, st in enumerate(self.stacks):
            st.window_state = self._observe(i)
            st.window_votes.clear()
            st.ticks_in_window = 0
        for _ in range(self.eval_samples):
            try:
                votes = self.house.advance_sample()
            except Exception as exc:
                raise MediationError("/".join(self.human_ids), str(exc)) from exc
            for i, st in enumerate(self.stacks):
                v = votes[i]
                self.vote_log[i].append(v)
                if v is not None:
                    st.window_votes.append(v)
                    collected[i].append(v)
                st.ticks_in_window += 1
                if st.ticks_in_window >= st.t_l:
                    self._close_window(i, st)
        return [
            comfort_goodness(c, *self.theta) if c else None
            for c in collected
        ]

    def _close_window(self, idx: int, st: _OccupantStack) -> None:
        # Same shortfall reward convention as the solo learner view.
        reward = (comfort_goodness(st.window_votes, *self.theta)
                  if st.window_votes else NEUTRAL_COMFORT) - 1.0
        s_next = self._observe(idx)
        q_update(st.q, st.window_state, st.credited_action, reward, s_next, self.inner_params)
        st.window_state = s_next
        st.window_votes.clear()
        st.ticks_in_window = 0
