"""Three-level adaptive control stack with simulators and experiment harness.

An inner tabular learner acts on a fast loop, a governor adapts the
learner's evaluation and actuation periods per human, and a mediator
mixes multiple humans' actions under an optional fairness objective.
Two environments exercise the stack: a forward-collision-warning drive
and a multi-occupant thermal house.
"""

from .governor import GovernorGrid, GovernorState, governor_reward, run_governor
from .mediator import (
    FairnessParams,
    UtilityTracker,
    WeightState,
    coefficient_of_variation,
    mediator_reward,
    run_mediator,
    wavg,
)
from .metrics import ComfortConfig, ConfusionCounts, PmvInputs, accuracy_mcc, fcw_performance, hvac_performance, pmv
from .qlearn import LearningParams, QTable, TimeScales, multisample_run, q_update, select_action

__version__ = "0.1.0"
