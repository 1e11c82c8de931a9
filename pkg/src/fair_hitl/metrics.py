"""Performance and comfort mathematics.

Confusion-matrix scores for the collision-warning application, the Fanger
steady-state thermal comfort index for the HVAC application, and the two
performance functions that feed agent rewards. Everything here is a pure
function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ConfusionCounts",
    "PmvInputs",
    "ComfortConfig",
    "PmvConvergenceError",
    "accuracy_mcc",
    "fcw_performance",
    "pmv",
    "hvac_performance",
]


class PmvConvergenceError(RuntimeError):
    """Clothing surface temperature iteration failed to converge."""

    def __init__(self, inputs: "PmvInputs") -> None:
        super().__init__(f"surface-temperature iteration did not converge for {inputs}")
        self.inputs = inputs


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary-classification outcome counts."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )


def accuracy_mcc(c: ConfusionCounts) -> tuple[float, float]:
    """Accuracy and Matthews correlation coefficient of the counts.

    MCC is defined as 0 when any of the four marginals is zero (the
    usual convention for the degenerate denominator).
    """
    if c.total == 0:
        raise ValueError("cannot score empty confusion counts")
    acc = (c.tp + c.tn) / c.total
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        mcc = 0.0
    else:
        mcc = (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denom)
    return acc, mcc


def fcw_performance(c: ConfusionCounts) -> float:
    """Combined Acc + MCC score, affinely normalized onto [0, 1].

    Acc lives on [0, 1] and MCC on [-1, 1], so the plain sum spans
    [-1, 2]; mapping MCC through (MCC + 1) / 2 first and averaging the
    two terms yields the same ordering on a [0, 1] scale.
    """
    acc, mcc = accuracy_mcc(c)
    return (acc + (mcc + 1.0) / 2.0) / 2.0


@dataclass(frozen=True)
class PmvInputs:
    """Environmental and personal inputs to the comfort index.

    Temperatures in deg C, air velocity in m/s, relative humidity as a
    fraction in [0, 1], metabolic rate in met, clothing in clo.
    """

    air_temperature: float
    mean_radiant_temperature: float
    air_velocity: float
    relative_humidity: float
    metabolic_rate: float
    clothing_insulation: float

    def __post_init__(self) -> None:
        checks = (
            ("air_temperature", self.air_temperature, -10.0, 50.0),
            ("mean_radiant_temperature", self.mean_radiant_temperature, -10.0, 50.0),
            ("air_velocity", self.air_velocity, 0.0, 2.0),
            ("relative_humidity", self.relative_humidity, 0.0, 1.0),
            ("metabolic_rate", self.metabolic_rate, 0.5, 5.0),
            ("clothing_insulation", self.clothing_insulation, 0.0, 2.0),
        )
        for name, value, lo, hi in checks:
            if not (lo <= value <= hi) or not math.isfinite(value):
                raise ValueError(f"{name}={value} outside physical range [{lo}, {hi}]")


# Tolerance of 1e-5 degC on the clothing surface temperature; tcl = 100*x - 273,
# so the stopping criterion on x is 1e-7.
_TCL_EPS = 1e-7
_TCL_MAX_ITER = 150


def pmv(inputs: PmvInputs) -> float:
    """Fanger steady-state predicted mean vote, clamped to [-3, 3].

    Solves the clothing surface temperature by damped fixed-point
    iteration, then evaluates the heat-balance vote. Relative humidity
    is converted to water vapor pressure with the standard saturation
    correlation.
    """
    ta = inputs.air_temperature
    tr = inputs.mean_radiant_temperature
    vel = inputs.air_velocity
    met = inputs.metabolic_rate
    clo = inputs.clothing_insulation

    # water vapor pressure in Pa
    pa = inputs.relative_humidity * 1000.0 * math.exp(16.6536 - 4030.183 / (ta + 235.0))

    icl = 0.155 * clo  # clothing insulation in m2K/W
    m = met * 58.15  # metabolic rate in W/m2
    mw = m  # no external work

    if icl <= 0.078:
        fcl = 1.0 + 1.29 * icl
    else:
        fcl = 1.05 + 0.645 * icl

    hcf = 12.1 * math.sqrt(vel)  # forced convection coefficient
    taa = ta + 273.0
    tra = tr + 273.0

    # clothing surface temperature, solved iteratively
    tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1)
    p1 = icl * fcl
    p2 = p1 * 3.96
    p3 = p1 * 100.0
    p4 = p1 * taa
    p5 = 308.7 - 0.028 * mw + p2 * (tra / 100.0) ** 4
    xn = tcla / 100.0
    xf = tcla / 50.0
    hc = hcf
    n = 0
    while abs(xn - xf) > _TCL_EPS:
        xf = (xf + xn) / 2.0
        hcn = 2.38 * abs(100.0 * xf - taa) ** 0.25
        hc = hcf if hcf > hcn else hcn
        xn = (p5 + p4 * hc - p2 * xf**4) / (100.0 + p3 * hc)
        n += 1
        if n > _TCL_MAX_ITER:
            raise PmvConvergenceError(inputs)
    tcl = 100.0 * xn - 273.0

    # heat loss components
    hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa)  # skin diffusion
    hl2 = 0.42 * (mw - 58.15) if mw > 58.15 else 0.0  # sweating
    hl3 = 1.7e-5 * m * (5867.0 - pa)  # latent respiration
    hl4 = 0.0014 * m * (34.0 - ta)  # dry respiration
    hl5 = 3.96 * fcl * (xn**4 - (tra / 100.0) ** 4)  # radiation
    hl6 = fcl * hc * (tcl - ta)  # convection

    ts = 0.303 * math.exp(-0.036 * m) + 0.028
    vote = ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6)
    return max(-3.0, min(3.0, vote))


@dataclass(frozen=True)
class ComfortConfig:
    """Weights and window for the comfort performance score.

    theta1 weights the mean absolute vote, theta2 the vote dispersion;
    window is the trailing sample count the statistics are taken over
    (240 samples = one simulated day at a 6-minute sampling period).
    """

    theta1: float = 0.7
    theta2: float = 0.3
    window: int = 240

    def __post_init__(self) -> None:
        if not (self.theta1 > self.theta2 > 0.0):
            raise ValueError(f"need theta1 > theta2 > 0, got {self.theta1}, {self.theta2}")
        if abs(self.theta1 + self.theta2 - 1.0) > 1e-12:
            raise ValueError("theta1 + theta2 must equal 1")
        if self.window < 1:
            raise ValueError("window must be at least 1")


def hvac_performance(pmv_series: Sequence[float], cfg: ComfortConfig) -> float:
    """Comfort goodness in [0, 1] from a vote series; higher is better.

    Discomfort is theta1 * mean(|vote|) + theta2 * std(vote) over the
    trailing window; goodness is 1 - discomfort / 3 so that a window of
    identically zero votes scores exactly 1.
    """
    if len(pmv_series) < cfg.window:
        raise ValueError(
            f"need at least {cfg.window} samples, got {len(pmv_series)}"
        )
    tail = np.asarray(pmv_series[-cfg.window:], dtype=float)
    discomfort = cfg.theta1 * float(np.mean(np.abs(tail))) + cfg.theta2 * float(np.std(tail))
    return max(0.0, min(1.0, 1.0 - discomfort / 3.0))
