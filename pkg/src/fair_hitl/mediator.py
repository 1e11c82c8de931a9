"""Top-level agent that mixes per-human actions and mediates actuation rates.

States are weight vectors on a 0.2 grid summing to one (held as integer
fifths so the closure is exact); actions jump directly to any state.
The applied action is the weighted average of the per-human preferred
actions, the mediated actuation rate is the minimum over the per-human
rates, and both are echoed back so each lower-level agent credits its
reward to what was actually done. An optional fairness term, driven by
the coefficient of variation of time-discounted per-human utilities,
mixes into the reward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .governor import governor_reward, stepweight
from .qlearn import LearningParams, QTable, q_update, select_action

__all__ = [
    "WeightState",
    "round_setpoint",
    "UtilityTracker",
    "FairnessParams",
    "MediationError",
    "MediatedSystem",
    "MediatorRunResult",
    "enumerate_weight_states",
    "wavg",
    "mediate_actuation_rates",
    "update_utilities",
    "coefficient_of_variation",
    "fairness_reward",
    "mediator_reward",
    "calculate_state_performance",
    "run_mediator",
]


class MediationError(RuntimeError):
    """A per-human stack failed during a mediated measurement."""

    def __init__(self, human: str, message: str) -> None:
        super().__init__(f"human {human}: {message}")
        self.human = human


@dataclass(frozen=True)
class WeightState:
    """Per-human weights as integer numerators over a common grid base."""

    numerators: tuple[int, ...]
    base: int = 5

    def __post_init__(self) -> None:
        if self.base < 1:
            raise ValueError("base must be positive")
        if any(v < 0 or v > self.base for v in self.numerators):
            raise ValueError(f"numerators {self.numerators} outside [0, {self.base}]")
        if sum(self.numerators) != self.base:
            raise ValueError(f"numerators {self.numerators} must sum to {self.base}")

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(v / self.base for v in self.numerators)


def enumerate_weight_states(n: int, step: float = 0.2) -> list[WeightState]:
    """All compositions of 1 into n parts on the step grid, lexicographic."""
    if n < 1:
        raise ValueError("need at least one human")
    base = round(1.0 / step)
    if base < 1 or abs(base * step - 1.0) > 1e-9:
        raise ValueError(f"1/step must be a positive integer, got step={step}")

    def compose(parts: int, remaining: int) -> list[tuple[int, ...]]:
        if parts == 1:
            return [(remaining,)]
        return [
            (head,) + tail
            for head in range(remaining + 1)
            for tail in compose(parts - 1, remaining - head)
        ]

    return [WeightState(t, base) for t in compose(n, base)]


def wavg(actions: Sequence[float], weights: "WeightState | Sequence[float]") -> float:
    """Weighted average of actions; weights need not be normalized."""
    w = weights.weights if isinstance(weights, WeightState) else tuple(weights)
    if len(actions) != len(w):
        raise ValueError(f"{len(actions)} actions vs {len(w)} weights")
    total = sum(w)
    if total <= 0.0:
        raise ValueError("all-zero weights leave the mediated action undefined")
    return sum(wi * ai for wi, ai in zip(w, actions)) / total


def round_setpoint(value: float) -> int:
    """Nearest whole degree, halves up, tolerant of float representation dust.

    Weighted averages of integer set-points land on exact halves (for
    example 75.5) that plain float arithmetic renders as 75.4999...;
    the epsilon absorbs that before the half-up rounding.
    """
    return math.floor(value + 0.5 + 1e-9)


def mediate_actuation_rates(rates: Sequence[int]) -> int:
    """The fastest (smallest) per-human actuation period.

    The caller must echo the returned rate back to every governor so
    that subsequent rewards are attributed to the mediated rate.
    """
    if len(rates) == 0:
        raise ValueError("no actuation rates to mediate")
    if any(r <= 0 for r in rates):
        raise ValueError(f"rates must be positive, got {rates}")
    return min(rates)


class UtilityTracker:
    """Time-discounted average weight per human.

    With samples w_0 .. w_t, the utility of human h is
    (1/t) * sum_j (j/t) * w_h_j, so recent assignments count more.
    Utilities are defined once at least two samples exist.
    """

    def __init__(self, n_humans: int) -> None:
        if n_humans < 1:
            raise ValueError("need at least one human")
        self.n_humans = n_humans
        self.history: list[tuple[float, ...]] = []

    @property
    def t(self) -> int:
        return len(self.history) - 1

    def append(self, weights: Sequence[float]) -> None:
        if len(weights) != self.n_humans:
            raise ValueError(f"expected {self.n_humans} weights, got {len(weights)}")
        self.history.append(tuple(float(w) for w in weights))

    def utilities(self) -> tuple[float, ...]:
        t = self.t
        if t < 1:
            raise ValueError("utilities need at least two weight samples")
        arr = np.asarray(self.history, dtype=float)
        factors = np.arange(t + 1, dtype=float) / t
        return tuple(float(u) for u in (factors @ arr) / t)


def update_utilities(tracker: UtilityTracker, weights: "WeightState | Sequence[float]") -> UtilityTracker:
    """Append a weight assignment; utilities recompute lazily on read."""
    w = weights.weights if isinstance(weights, WeightState) else weights
    tracker.append(w)
    return tracker


def coefficient_of_variation(utilities: Sequence[float]) -> float:
    """Relative dispersion of per-human utilities; 0 means perfectly even."""
    n = len(utilities)
    if n < 2:
        raise ValueError("coefficient of variation needs at least two humans")
    mean = sum(utilities) / n
    if mean <= 0.0:
        raise ValueError("mean utility is zero; fairness dispersion undefined")
    return math.sqrt(sum((u - mean) ** 2 for u in utilities) / ((n - 1) * mean**2))


@dataclass(frozen=True)
class FairnessParams:
    """Mixing scale between performance and fairness reward terms."""

    zeta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError(f"zeta={self.zeta} must be in [0, 1]")


def fairness_reward(cv_prev: float, cv_next: float) -> float:
    """Step-weighted reward for dispersion change; a drop in cv is positive."""
    d = cv_prev - cv_next
    sign = (d > 0) - (d < 0)
    return float(sign * stepweight(abs(d)))


def mediator_reward(
    p_prev: float, p_next: float, cv_prev: float, cv_next: float, zeta: FairnessParams
) -> float:
    """Convex mix of the performance-difference and fairness-difference terms."""
    if cv_prev < 0.0 or cv_next < 0.0:
        raise ValueError("cv values must be nonnegative")
    w = governor_reward(p_prev, p_next, "generic")
    f = fairness_reward(cv_prev, cv_next)
    return (1.0 - zeta.zeta) * w + zeta.zeta * f


class MediatedSystem(Protocol):
    """Per-human agent stacks over one shared environment.

    `preferred_actions` and `actuation_rates` read each human's current
    greedy action and governor-selected actuation period;
    `echo_action` / `echo_rate` inform the lower levels of what was
    actually applied; `run_mediated` applies the mediated action at the
    mediated rate and returns one experience score per human, with None
    for humans absent over the whole measurement.
    """

    n_humans: int
    human_ids: tuple[str, ...]
    last_action: float | None
    last_rate: int | None

    def preferred_actions(self) -> list[float]: ...

    def actuation_rates(self) -> list[int]: ...

    def echo_action(self, action: float) -> None: ...

    def echo_rate(self, rate: int) -> None: ...

    def run_mediated(self, action: float, rate: int) -> list[float | None]: ...


# Score reported when no human was present for any part of a measurement.
NEUTRAL_PERFORMANCE = 0.5


def calculate_state_performance(state: WeightState, humans: MediatedSystem) -> float:
    """Measure a weight state on the live per-human stacks.

    Mixes the current preferred actions with the state's weights,
    mediates the actuation rate to the minimum, echoes both back, runs
    the shared environment, and returns the mean experience over the
    humans that were present (a neutral 0.5 if nobody was).
    """
    actions = humans.preferred_actions()
    rates = humans.actuation_rates()
    if len(actions) != humans.n_humans or len(rates) != humans.n_humans:
        raise MediationError("?", "stack returned wrong-arity actions or rates")
    mixed = wavg(actions, state)
    rate = mediate_actuation_rates(rates)
    humans.echo_action(mixed)
    humans.echo_rate(rate)
    experiences = humans.run_mediated(mixed, rate)
    present = [e for e in experiences if e is not None]
    if not present:
        return NEUTRAL_PERFORMANCE
    return float(sum(present) / len(present))


@dataclass
class MediatorRunResult:
    q: QTable
    weight_trace: list[tuple[float, ...]] = field(default_factory=list)
    action_trace: list[float] = field(default_factory=list)  # mediated action per iteration
    performance_trace: list[float] = field(default_factory=list)
    cv_trace: list[float] = field(default_factory=list)
    reward_trace: list[float] = field(default_factory=list)
    zeta: float = 0.0

    def modal_weights(self, final_fraction: float = 0.1) -> tuple[float, ...]:
        n = len(self.weight_trace)
        tail = self.weight_trace[max(0, n - max(1, int(round(n * final_fraction)))):]
        counts: dict[tuple[float, ...], int] = {}
        for w in tail:
            counts[w] = counts.get(w, 0) + 1
        return max(counts, key=lambda k: (counts[k], k))

    def distinct_states(self, final_fraction: float = 0.25) -> set[tuple[float, ...]]:
        n = len(self.weight_trace)
        tail = self.weight_trace[max(0, n - max(1, int(round(n * final_fraction)))):]
        return set(tail)

    def csv_rows(self) -> list[str]:
        n = len(self.weight_trace[0]) if self.weight_trace else 0
        header = ",".join(["iteration"] + [f"w_{i + 1}" for i in range(n)] + ["a_t", "p_s", "cv", "r_m", "zeta"])
        rows = [header]
        for i, (w, a, p, cv, r) in enumerate(
            zip(self.weight_trace, self.action_trace, self.performance_trace, self.cv_trace, self.reward_trace)
        ):
            rows.append(
                ",".join([str(i)] + [repr(x) for x in w] + [repr(a), repr(p), repr(cv), repr(r), repr(self.zeta)])
            )
        return rows


def run_mediator(
    system: MediatedSystem,
    params: LearningParams,
    fairness: FairnessParams,
    iterations: int,
    rng: np.random.Generator,
    q: QTable | None = None,
) -> MediatorRunResult:
    """Q-learning over the weight simplex with jump actions.

    Action k jumps straight to enumerated state k, so the agent can
    reweight humans in one move. Utilities accrue one sample per
    iteration (the state jumped to); the fairness term compares the
    dispersion before and after the jump. An existing table continues
    learning in place (deployment after training).
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    states = enumerate_weight_states(system.n_humans)
    if q is None:
        q = QTable(len(states), len(states))
    elif (q.n_states, q.n_actions) != (len(states), len(states)):
        raise ValueError("existing table shape does not match the weight-state space")
    result = MediatorRunResult(q=q, zeta=fairness.zeta)
    tracker = UtilityTracker(system.n_humans)
    s_idx = int(rng.integers(len(states)))
    tracker.append(states[s_idx].weights)
    cv_prev: float | None = None
    for _ in range(iterations):
        p_s = calculate_state_performance(states[s_idx], system)
        action = select_action(q, s_idx, params.epsilon, rng)
        n_idx = action  # jump action k lands on state k
        p_next = calculate_state_performance(states[n_idx], system)
        update_utilities(tracker, states[n_idx])
        cv_next = coefficient_of_variation(tracker.utilities())
        r = mediator_reward(
            p_s, p_next, cv_next if cv_prev is None else cv_prev, cv_next, fairness
        )
        q_update(q, s_idx, action, r, n_idx, params)
        result.weight_trace.append(states[n_idx].weights)
        result.action_trace.append(system.last_action if system.last_action is not None else 0.0)
        result.performance_trace.append(p_next)
        result.cv_trace.append(cv_next)
        result.reward_trace.append(r)
        cv_prev = cv_next
        s_idx = n_idx
    return result
