"""Outer agent that adapts the inner learner's evaluation and actuation periods.

States are points on a discretized (T_l, T_a) grid constrained to
T_l >= T_a; actions move each index up, down, or hold it, with total
clamping at grid edges and at the constraint boundary. The reward is a
weighted difference between the measured performance before and after
the move, so the agent climbs toward the timescales under which the
inner learner serves its human best.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .qlearn import LearningParams, QTable, epsilon_schedule, q_update, select_action

__all__ = [
    "GOVERNOR_ACTIONS",
    "GovernorGrid",
    "GovernorState",
    "GovernorRunResult",
    "enumerate_governor_states",
    "apply_governor_action",
    "stepweight",
    "governor_reward",
    "run_governor",
]

# All combinations of {down, hold, up} applied to (T_l, T_a).
GOVERNOR_ACTIONS: tuple[tuple[int, int], ...] = tuple(
    (dl, da) for dl in (-1, 0, 1) for da in (-1, 0, 1)
)


@dataclass(frozen=True)
class GovernorGrid:
    """Ordered grid points for T_l and T_a, in multiples of the base tick."""

    t_l_values: tuple[int, ...]
    t_a_values: tuple[int, ...]

    def __post_init__(self) -> None:
        for name, vals in (("t_l_values", self.t_l_values), ("t_a_values", self.t_a_values)):
            if len(vals) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing, got {vals}")


@dataclass
class GovernorState:
    """One grid point, optionally carrying its last measured performance."""

    t_l_index: int
    t_a_index: int
    performance: float | None = None

    def values(self, grid: GovernorGrid) -> tuple[int, int]:
        return grid.t_l_values[self.t_l_index], grid.t_a_values[self.t_a_index]


def enumerate_governor_states(grid: GovernorGrid) -> list[GovernorState]:
    """All grid points with T_l >= T_a, row-major in (T_l, T_a)."""
    states = [
        GovernorState(i, j)
        for i, t_l in enumerate(grid.t_l_values)
        for j, t_a in enumerate(grid.t_a_values)
        if t_l >= t_a
    ]
    if not states:
        raise ValueError("grid admits no state satisfying T_l >= T_a")
    return states


def apply_governor_action(grid: GovernorGrid, s: GovernorState, action: int) -> GovernorState:
    """Move the state one grid step per the action, clamping illegal moves.

    A component that would leave the grid stays put. If the combined
    move violates T_l >= T_a, the offending components are reverted,
    T_l first; reverting both always restores a legal state.
    """
    dl, da = GOVERNOR_ACTIONS[action]
    li = min(max(s.t_l_index + dl, 0), len(grid.t_l_values) - 1)
    ai = min(max(s.t_a_index + da, 0), len(grid.t_a_values) - 1)
    if grid.t_l_values[li] < grid.t_a_values[ai]:
        li = s.t_l_index
    if grid.t_l_values[li] < grid.t_a_values[ai]:
        ai = s.t_a_index
    return GovernorState(li, ai)


def stepweight(delta: float) -> int:
    """Increasing step weighting of a performance (or fairness) change."""
    if delta < 0.05:
        return 1
    if delta < 0.15:
        return 2
    return 3


def governor_reward(p_prev: float, p_next: float, variant: str = "generic") -> float:
    """Weighted signed difference between two performance readings.

    The generic variant is sign(dp) * stepweight(|dp|); the signed-step
    variant additionally scales by the new performance, so moves toward
    already-good regions are rewarded more.
    """
    for name, p in (("p_prev", p_prev), ("p_next", p_next)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}={p} outside [0, 1]")
    dp = p_next - p_prev
    sign = (dp > 0) - (dp < 0)
    if variant == "generic":
        return float(sign * stepweight(abs(dp)))
    if variant == "signed-step":
        return float(sign * stepweight(abs(dp)) * p_next)
    raise ValueError(f"unknown reward variant {variant!r}")


@dataclass
class GovernorRunResult:
    q: QTable
    state_trace: list[tuple[int, int]] = field(default_factory=list)  # (t_l, t_a) per iteration
    performance_trace: list[float] = field(default_factory=list)
    reward_trace: list[float] = field(default_factory=list)
    epsilon_trace: list[float] = field(default_factory=list)
    final_state_index: int = 0
    final_epsilon: float = 0.0

    def modal_state(self, final_fraction: float = 0.1) -> tuple[int, int]:
        """Most frequent state over the final fraction of iterations."""
        n = len(self.state_trace)
        tail = self.state_trace[max(0, n - max(1, int(round(n * final_fraction)))):]
        counts: dict[tuple[int, int], int] = {}
        for s in tail:
            counts[s] = counts.get(s, 0) + 1
        return max(counts, key=lambda k: (counts[k], (-k[0], -k[1])))

    def csv_rows(self) -> list[str]:
        rows = ["iteration,t_l,t_a,p_s,reward,epsilon"]
        for i, ((t_l, t_a), p, r, e) in enumerate(
            zip(self.state_trace, self.performance_trace, self.reward_trace, self.epsilon_trace)
        ):
            rows.append(f"{i},{t_l},{t_a},{p!r},{r!r},{e!r}")
        return rows


def run_governor(
    measure: Callable[[int, int], float],
    grid: GovernorGrid,
    params: LearningParams,
    iterations: int,
    rng: np.random.Generator,
    variant: str = "generic",
    adaptive_epsilon: bool = True,
    q: QTable | None = None,
    start_state_index: int | None = None,
    initial_epsilon: float | None = None,
) -> GovernorRunResult:
    """Q-learning loop over the timescale grid.

    `measure(t_l, t_a)` runs the inner learner at those periods and
    returns its performance in [0, 1]; it is called afresh for both the
    current and the candidate state every iteration because the
    underlying human behavior drifts. Exploration optionally decays
    when the reward stream stagnates. Passing an existing table and
    start state continues a previous run (used when the human behind
    the environment is swapped mid-experiment).
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    states = enumerate_governor_states(grid)
    index_of = {(s.t_l_index, s.t_a_index): k for k, s in enumerate(states)}
    if q is None:
        q = QTable(len(states), len(GOVERNOR_ACTIONS))
    elif (q.n_states, q.n_actions) != (len(states), len(GOVERNOR_ACTIONS)):
        raise ValueError("existing table shape does not match the grid")
    result = GovernorRunResult(q=q)
    epsilon = params.epsilon if initial_epsilon is None else initial_epsilon
    s_idx = int(rng.integers(len(states))) if start_state_index is None else start_state_index
    for it in range(iterations):
        state = states[s_idx]
        t_l, t_a = state.values(grid)
        try:
            p_s = measure(t_l, t_a)
        except Exception as exc:
            raise RuntimeError(f"environment failure at iteration {it}") from exc
        state.performance = p_s
        action = select_action(q, s_idx, epsilon, rng)
        nxt = apply_governor_action(grid, state, action)
        n_idx = index_of[(nxt.t_l_index, nxt.t_a_index)]
        nt_l, nt_a = nxt.values(grid)
        try:
            p_next = measure(nt_l, nt_a)
        except Exception as exc:
            raise RuntimeError(f"environment failure at iteration {it}") from exc
        r = governor_reward(p_s, p_next, variant)
        q_update(q, s_idx, action, r, n_idx, params)
        result.state_trace.append((nt_l, nt_a))
        result.performance_trace.append(p_next)
        result.reward_trace.append(r)
        result.epsilon_trace.append(epsilon)
        if adaptive_epsilon:
            epsilon = epsilon_schedule(epsilon, result.reward_trace, params)
        s_idx = n_idx
    result.final_state_index = s_idx
    result.final_epsilon = epsilon
    return result
