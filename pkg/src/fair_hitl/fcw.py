"""Two-vehicle longitudinal simulator with an adaptive collision alarm.

A point-mass ego vehicle follows a scripted lead vehicle that slows
down at seeded random moments. The alarm fires when the time to
collision drops below a threshold chosen by the inner learner; the
simulated driver reacts to alarms after a profile-specific delay. Every
actuation period is classified into one confusion-matrix cell, and the
accumulated counts yield the warning-quality performance score.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .metrics import ConfusionCounts, fcw_performance
from .qlearn import LearningParams, QTable, TimeScales, multisample_run

__all__ = [
    "TICK_S",
    "SAFETY_DISTANCE_M",
    "TTC_THRESHOLDS",
    "VehicleParams",
    "Vehicle",
    "VehiclePairState",
    "DriverProfile",
    "AlarmPolicy",
    "CollisionEvent",
    "step_vehicle",
    "time_to_collision",
    "alarm_decision",
    "classify_window",
    "Driver",
    "LeadController",
    "FcwInnerEnv",
    "FcwGovernorSystem",
    "make_driver_profile",
]

G = 9.81
TICK_S = 0.25  # base sampling period
SAFETY_DISTANCE_M = 7.0  # from the two-seconds rule at urban speed

# Candidate alarm thresholds (seconds of time-to-collision); these are
# the inner learner's actions.
TTC_THRESHOLDS: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0)

# Inner-learner state space: gap range x closing-speed range.
GAP_EDGES = (7.0, 15.0, 30.0)  # <7, 7-15, 15-30, >30
CLOSING_EDGES = (0.0, 5.0)  # <=0, 0-5, >5


class CollisionEvent(RuntimeError):
    """The gap closed completely."""

    def __init__(self, gap: float) -> None:
        super().__init__(f"vehicles collided (gap {gap:.2f} m)")
        self.gap = gap


@dataclass(frozen=True)
class VehicleParams:
    mass: float = 1200.0  # kg
    max_brake_force: float = 9000.0  # N
    max_accel_force: float = 3000.0  # N
    rolling_friction: float = 0.015

    def __post_init__(self) -> None:
        if min(self.mass, self.max_brake_force, self.max_accel_force) <= 0:
            raise ValueError("mass and force limits must be positive")
        if not 0.0 <= self.rolling_friction <= 0.05:
            raise ValueError(f"rolling friction {self.rolling_friction} outside [0, 0.05]")


@dataclass(frozen=True)
class Vehicle:
    position: float  # m
    velocity: float  # m/s


@dataclass(frozen=True)
class VehiclePairState:
    ego: Vehicle
    lead: Vehicle
    clock: float = 0.0

    @property
    def gap(self) -> float:
        return self.lead.position - self.ego.position

    @property
    def closing_speed(self) -> float:
        return self.ego.velocity - self.lead.velocity


def step_vehicle(v: Vehicle, params: VehicleParams, pedal: float, dt: float) -> Vehicle:
    """One Euler step; positive pedal accelerates, negative brakes.

    Velocity is floored at zero (no reversing) and rolling friction
    always opposes motion.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    pedal = min(max(pedal, -1.0), 1.0)
    force = pedal * (params.max_accel_force if pedal >= 0 else params.max_brake_force)
    friction = params.rolling_friction * G * (1.0 if v.velocity > 0 else 0.0)
    velocity = max(0.0, v.velocity + dt * (force / params.mass - friction))
    return Vehicle(position=v.position + dt * velocity, velocity=velocity)


def time_to_collision(state: VehiclePairState) -> float | None:
    """Seconds until contact at current closing speed; None when opening."""
    gap = state.gap
    if gap <= 0:
        raise CollisionEvent(gap)
    closing = state.closing_speed
    if closing <= 0:
        return None
    return gap / closing


@dataclass
class AlarmPolicy:
    """Current alarm threshold plus the candidate set it was drawn from."""

    threshold: float
    candidates: tuple[float, ...] = TTC_THRESHOLDS

    def __post_init__(self) -> None:
        if self.threshold <= 0 or any(c <= 0 for c in self.candidates):
            raise ValueError("thresholds must be positive")


def alarm_decision(ttc: float | None, policy: AlarmPolicy) -> bool:
    """Alarm iff a time-to-collision exists and is strictly below threshold."""
    return ttc is not None and ttc < policy.threshold


def classify_window(min_gap: float, alarm_fired: bool, braked_on_alarm: bool,
                    safety: float = SAFETY_DISTANCE_M) -> str:
    """Label one evaluation window as tp / fp / tn / fn.

    A window where the gap dipped below the safety distance counts as a
    true positive only if the alarm fired and the driver's brake
    response landed inside the window; otherwise the system failed the
    driver and it counts as a false negative. An alarm with no dip is a
    false positive; quiet and safe is a true negative.
    """
    if alarm_fired:
        if min_gap < safety:
            return "tp" if braked_on_alarm else "fn"
        return "fp"
    return "fn" if min_gap < safety else "tn"


@dataclass(frozen=True)
class DriverProfile:
    """Car-following style and alarm responsiveness of one driver."""

    identifier: str
    brake_intensity: float  # fraction of max brake force
    accel_intensity: float  # fraction of max accel force
    preferred_gap: float  # m
    response_time_range: tuple[float, float]  # s, sampled uniformly

    def __post_init__(self) -> None:
        lo, hi = self.response_time_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad response range {self.response_time_range}")
        for name in ("brake_intensity", "accel_intensity"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in (0, 1]")
        if self.preferred_gap <= 0:
            raise ValueError("preferred_gap must be positive")


# Qualitative orderings: the aggressive driver reacts fastest, tailgates
# and stomps the pedals; the slow driver is the opposite; the moderate
# driver sits between them on every axis.
_PROFILES: dict[str, DriverProfile] = {
    "H1": DriverProfile("H1", brake_intensity=0.6, accel_intensity=0.6,
                        preferred_gap=15.0, response_time_range=(0.7, 1.3)),
    "H2": DriverProfile("H2", brake_intensity=0.9, accel_intensity=0.9,
                        preferred_gap=10.0, response_time_range=(0.3, 0.7)),
    "H3": DriverProfile("H3", brake_intensity=0.35, accel_intensity=0.35,
                        preferred_gap=25.0, response_time_range=(1.3, 2.0)),
}


def make_driver_profile(identifier: str) -> DriverProfile:
    try:
        return _PROFILES[identifier]
    except KeyError:
        raise ValueError(f"unknown driver {identifier!r}; choose from {sorted(_PROFILES)}") from None


# Gap band above which the driver speeds up, as a multiple of the
# preferred gap; between the preferred gap and this the driver coasts.
COAST_BAND = 1.3
BRAKE_HOLD_TICKS = 6  # alarm-response brake press lasts 1.5 s


class Driver:
    """Stateful driver: baseline car-following plus delayed alarm response."""

    def __init__(self, profile: DriverProfile, rng: np.random.Generator) -> None:
        self.profile = profile
        self.rng = rng
        self._due_tick: int | None = None
        self._hold_left = 0
        self.responded_this_tick = False

    def sample_delay_ticks(self) -> int:
        lo, hi = self.profile.response_time_range
        return max(1, int(round(self.rng.uniform(lo, hi) / TICK_S)))

    def step(self, alarm: bool, gap: float, closing_speed: float, tick: int) -> float:
        """Pedal command for this tick."""
        self.responded_this_tick = False
        if alarm and self._due_tick is None and self._hold_left == 0:
            self._due_tick = tick + self.sample_delay_ticks()
        if self._due_tick is not None and tick >= self._due_tick:
            self._due_tick = None
            self._hold_left = BRAKE_HOLD_TICKS
            self.responded_this_tick = True
        if self._hold_left > 0:
            self._hold_left -= 1
            return -self.profile.brake_intensity
        if gap < self.profile.preferred_gap:
            return -self.profile.brake_intensity
        if gap > self.profile.preferred_gap * COAST_BAND and closing_speed <= 2.0:
            return self.profile.accel_intensity
        return 0.0

    def reset(self) -> None:
        self._due_tick = None
        self._hold_left = 0
        self.responded_this_tick = False


class LeadController:
    """Scripted lead vehicle: cruise with seeded random slowdown events."""

    MIN_EVENT_SPEED = 6.0  # the lead slows down but does not stop dead

    def __init__(
        self,
        rng: np.random.Generator,
        cruise_speed: float = 16.0,
        event_rate: float = 0.006,  # per tick
    ) -> None:
        self.rng = rng
        self.cruise_speed = cruise_speed
        self.event_rate = event_rate
        self._brake_ticks_left = 0
        self._brake_pedal = 0.0

    def step(self, velocity: float) -> float:
        if self._brake_ticks_left > 0:
            self._brake_ticks_left -= 1
            if velocity <= self.MIN_EVENT_SPEED:
                self._brake_ticks_left = 0
            else:
                return self._brake_pedal
        if self.rng.random() < self.event_rate:
            self._brake_ticks_left = int(self.rng.uniform(1.5, 3.0) / TICK_S)
            self._brake_pedal = -float(self.rng.uniform(0.25, 0.55))
            return self._brake_pedal
        if velocity < self.cruise_speed:
            return 0.4
        return 0.0


@dataclass
class _ClassWindow:
    min_gap: float = float("inf")
    alarm_fired: bool = False
    braked: bool = False
    ticks: int = 0


class FcwInnerEnv:
    """Learner view of the drive: alarm thresholds in, warning quality out.

    One evaluation window spans one actuation period (each `apply`
    closes the open window and starts the next, so every window ran
    under a single threshold); the reward for a learning window is the
    normalized Acc+MCC score of the evaluation windows it contains.
    """

    n_states = (len(GAP_EDGES) + 1) * (len(CLOSING_EDGES) + 1)
    n_actions = len(TTC_THRESHOLDS)

    def __init__(
        self,
        profile: DriverProfile,
        seed: int,
        params: VehicleParams = VehicleParams(),
        initial_gap: float = 30.0,
        initial_speed: float = 20.0,
    ) -> None:
        self.params = params
        self.rng = np.random.default_rng([seed, 0xFC])
        self.driver = Driver(profile, self.rng)
        self.lead_ctrl = LeadController(self.rng)
        self.state = VehiclePairState(
            ego=Vehicle(0.0, initial_speed),
            lead=Vehicle(initial_gap, initial_speed),
        )
        self.policy = AlarmPolicy(TTC_THRESHOLDS[0])
        self.tick = 0
        self.collisions = 0
        self._window = _ClassWindow()
        self._window_counts = ConfusionCounts()
        self._run_counts = ConfusionCounts()
        self.recorder: list[str] | None = None

    def swap_profile(self, profile: DriverProfile) -> None:
        self.driver = Driver(profile, self.rng)

    def begin_measurement(self) -> None:
        self._run_counts = ConfusionCounts()

    def observe(self) -> int:
        gap = self.state.gap
        closing = self.state.closing_speed
        g = sum(gap >= e for e in GAP_EDGES)
        c = sum(closing > e for e in CLOSING_EDGES)
        return g * (len(CLOSING_EDGES) + 1) + c

    def apply(self, action: int) -> None:
        self._close_class_window()
        self.policy.threshold = TTC_THRESHOLDS[action]

    def _close_class_window(self) -> None:
        if self._window.ticks == 0:
            return
        label = classify_window(
            self._window.min_gap, self._window.alarm_fired, self._window.braked
        )
        one = ConfusionCounts(**{label: 1})
        self._window_counts += one
        self._run_counts += one
        self._window = _ClassWindow()

    def step(self) -> None:
        try:
            ttc = time_to_collision(self.state)
        except CollisionEvent:
            # Flag the crash, then respawn the lead ahead at matched speed
            # so the drive continues deterministically.
            self.collisions += 1
            self._window.min_gap = 0.0
            self.state = replace(
                self.state,
                lead=Vehicle(self.state.ego.position + 40.0, self.state.ego.velocity),
            )
            ttc = None
        alarm = alarm_decision(ttc, self.policy)
        gap = self.state.gap
        ego_pedal = self.driver.step(alarm, gap, self.state.closing_speed, self.tick)
        lead_pedal = self.lead_ctrl.step(self.state.lead.velocity)
        self._window.alarm_fired |= alarm
        self._window.braked |= self.driver.responded_this_tick
        self._window.min_gap = min(self._window.min_gap, gap)
        self._window.ticks += 1
        ego = step_vehicle(self.state.ego, self.params, ego_pedal, TICK_S)
        lead = step_vehicle(self.state.lead, self.params, lead_pedal, TICK_S)
        self.state = VehiclePairState(ego=ego, lead=lead, clock=self.state.clock + TICK_S)
        if self.recorder is not None:
            t = "" if ttc is None else repr(ttc)
            self.recorder.append(
                f"{self.state.clock!r},{ego.position!r},{ego.velocity!r},"
                f"{lead.position!r},{lead.velocity!r},{self.state.gap!r},{t},"
                f"{int(alarm)},{ego_pedal!r}"
            )
        self.tick += 1

    def window_reward(self) -> float:
        # Shortfall reward (score - 1 <= 0): keeps a zero-initialized
        # table optimistic so every threshold gets tried per state.
        self._close_class_window()
        counts = self._window_counts
        self._window_counts = ConfusionCounts()
        if counts.total == 0:
            return -0.5
        return fcw_performance(counts) - 1.0

    def performance(self) -> float:
        if self._run_counts.total == 0:
            return 0.5
        return fcw_performance(self._run_counts)


class FcwGovernorSystem:
    """Persistent drive and inner learner measured at chosen timescales."""

    def __init__(
        self,
        profile: DriverProfile,
        seed: int,
        inner_params: LearningParams = LearningParams(),
        windows_per_measure: int = 1,
        measure_span: int | None = None,
    ) -> None:
        self.env = FcwInnerEnv(profile, seed=seed)
        self.q = QTable(self.env.n_states, self.env.n_actions)
        self.inner_params = inner_params
        self.windows_per_measure = windows_per_measure
        self.measure_span = measure_span
        self.rng = np.random.default_rng([seed, 0x60E])

    def measure(self, t_l: int, t_a: int) -> float:
        # With a span set, one reading aggregates enough drive time for
        # the confusion counts to be statistically meaningful.
        if self.measure_span is not None:
            return self.measure_horizon(t_l, t_a, self.measure_span)
        scales = TimeScales(TICK_S, t_a, t_l)
        self.env.begin_measurement()
        result = multisample_run(
            self.env, self.q, scales, self.inner_params,
            self.windows_per_measure * t_l, self.rng,
        )
        return result.performance

    def measure_horizon(self, t_l: int, t_a: int, min_samples: int) -> float:
        """One aggregate measurement spanning at least `min_samples` ticks."""
        scales = TimeScales(TICK_S, t_a, t_l)
        windows = max(1, -(-min_samples // t_l))
        self.env.begin_measurement()
        result = multisample_run(
            self.env, self.q, scales, self.inner_params, windows * t_l, self.rng
        )
        return result.performance

    def swap_profile(self, profile: DriverProfile) -> None:
        self.env.swap_profile(profile)
