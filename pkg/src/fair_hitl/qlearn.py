"""Generic finite-MDP tabular Q-learning with three-timescale scheduling.

The inner learner, the timescale governor, and the weight mediator all
share the same table representation, epsilon-greedy policy, and update
rule. The scheduling contract (`multisample_run`) drives an environment
on three nested periods: the environment is sampled every base tick, an
action is applied every `t_a` ticks, and one Q-update is performed per
`t_l`-tick window using the reward accumulated over that window,
credited to the action that was in force when the window opened.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

__all__ = [
    "LearningParams",
    "TimeScales",
    "QTable",
    "MultisampleEnv",
    "MultisampleResult",
    "select_action",
    "q_update",
    "epsilon_schedule",
    "multisample_run",
]

# Two window rewards closer than this are treated as "unchanged" by the
# exploration decay rule.
STAGNATION_TOL = 1e-9


@dataclass
class LearningParams:
    """Q-learning hyperparameters shared by all three agent levels."""

    alpha: float = 0.9
    gamma: float = 0.1
    epsilon: float = 0.2
    epsilon_floor: float = 0.01
    stagnation_window: int = 50

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "epsilon", "epsilon_floor"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} must be in [0, 1]")
        if self.epsilon_floor > self.epsilon:
            raise ValueError("epsilon_floor must not exceed epsilon")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be positive")


@dataclass(frozen=True)
class TimeScales:
    """Sampling, actuation and evaluation periods.

    `t_a` and `t_l` are expressed as positive integer multiples of the
    base sampling period `t_s` (which is in seconds and only describes
    what one tick means physically).
    """

    t_s: float
    t_a: int
    t_l: int

    def __post_init__(self) -> None:
        if self.t_s <= 0:
            raise ValueError("t_s must be positive")
        if not (self.t_l >= self.t_a >= 1):
            raise ValueError(f"need t_l >= t_a >= 1, got t_l={self.t_l}, t_a={self.t_a}")


class QTable:
    """Dense zero-initialized action-value table."""

    def __init__(self, n_states: int, n_actions: int) -> None:
        if n_states < 1 or n_actions < 1:
            raise ValueError("QTable needs at least one state and one action")
        self.n_states = n_states
        self.n_actions = n_actions
        self.values = np.zeros((n_states, n_actions), dtype=float)

    def copy(self) -> "QTable":
        out = QTable(self.n_states, self.n_actions)
        out.values = self.values.copy()
        return out

    def __repr__(self) -> str:
        return f"QTable({self.n_states}x{self.n_actions})"


def select_action(q: QTable, state: int, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action choice; argmax ties break to the lowest index."""
    if not 0 <= state < q.n_states:
        raise IndexError(f"state {state} out of range [0, {q.n_states})")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon={epsilon} must be in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(q.n_actions))
    return int(np.argmax(q.values[state]))


def q_update(q: QTable, s: int, a: int, r: float, s_next: int, params: LearningParams) -> QTable:
    """One-step update of entry (s, a) toward r + gamma * max_a' Q(s_next, a')."""
    if not 0 <= s < q.n_states or not 0 <= s_next < q.n_states:
        raise IndexError(f"state index out of range: s={s}, s_next={s_next}")
    if not 0 <= a < q.n_actions:
        raise IndexError(f"action {a} out of range [0, {q.n_actions})")
    if not math.isfinite(r):
        raise ValueError(f"reward must be finite, got {r}")
    best_next = float(np.max(q.values[s_next]))
    q.values[s, a] = (1.0 - params.alpha) * q.values[s, a] + params.alpha * (
        r + params.gamma * best_next
    )
    return q


def epsilon_schedule(
    epsilon: float, reward_history: Sequence[float], params: LearningParams
) -> float:
    """Halve exploration (down to the floor) when rewards have stagnated.

    Stagnation means the last `stagnation_window` rewards are pairwise
    identical within an absolute tolerance.
    """
    if epsilon < params.epsilon_floor:
        raise ValueError("epsilon already below floor")
    w = params.stagnation_window
    if len(reward_history) < w:
        return epsilon
    tail = reward_history[-w:]
    lo, hi = min(tail), max(tail)
    if hi - lo <= STAGNATION_TOL:
        return max(epsilon / 2.0, params.epsilon_floor)
    return epsilon


class MultisampleEnv(Protocol):
    """Environment contract for the three-timescale loop.

    `step` advances the environment by one base tick and collects
    whatever per-tick samples the window reward needs; `window_reward`
    consumes the samples gathered since it was last called;
    `performance` summarizes the whole run so far on a [0, 1] scale.
    """

    n_states: int
    n_actions: int

    def observe(self) -> int: ...

    def apply(self, action: int) -> None: ...

    def step(self) -> None: ...

    def window_reward(self) -> float: ...

    def performance(self) -> float: ...


@dataclass
class MultisampleResult:
    q: QTable
    performance: float
    actions: list[tuple[int, int]] = field(default_factory=list)  # (tick, action)
    rewards: list[float] = field(default_factory=list)  # one per closed window


def multisample_run(
    env: MultisampleEnv,
    q: QTable,
    scales: TimeScales,
    params: LearningParams,
    duration: int,
    rng: np.random.Generator,
) -> MultisampleResult:
    """Drive `env` for `duration` ticks under the three-timescale contract.

    Exactly `duration` environment steps, `duration / t_a` actuations
    (the duration must divide evenly; actuations land on the window
    grid because windows are opened at tick 0) and `duration / t_l`
    Q-updates are performed. Each window's reward is credited to the
    action in force at the window start; the bootstrap state is the
    observation made right after the window's last tick.
    """
    if duration <= 0 or duration % scales.t_l != 0:
        raise ValueError(f"duration {duration} must be a positive multiple of t_l={scales.t_l}")
    result = MultisampleResult(q=q, performance=0.0)
    current_action = -1
    window_state = -1
    window_action = -1
    for tick in range(duration):
        state = env.observe()
        if tick % scales.t_l == 0 and tick > 0:
            r = env.window_reward()
            q_update(q, window_state, window_action, r, state, params)
            result.rewards.append(r)
        if tick % scales.t_a == 0:
            current_action = select_action(q, state, params.epsilon, rng)
            env.apply(current_action)
            result.actions.append((tick, current_action))
        if tick % scales.t_l == 0:
            window_state = state
            window_action = current_action
        env.step()
    final_state = env.observe()
    r = env.window_reward()
    q_update(q, window_state, window_action, r, final_state, params)
    result.rewards.append(r)
    result.performance = env.performance()
    return result
