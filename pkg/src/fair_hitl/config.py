"""Flat key-value run configuration.

One config file fully determines a run (together with nothing else: no
wall-clock seeding anywhere). Unknown keys are rejected by name, parse
errors carry line numbers, and load -> serialize -> load round-trips to
an equal value.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config", "serialize_config"]

SCENARIOS = ("exp1", "exp2", "exp3", "exp4", "exp5", "exp6")


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x.strip()) for x in text.split(",") if x.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x.strip()) for x in text.split(",") if x.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


@dataclass
class RunConfig:
    """Everything a scenario run needs, with documented defaults."""

    scenario: str
    seed: int
    out_dir: str = "runs"
    iterations: int = 0  # 0 means the scenario's desk-scale default
    switch_iteration: int = 0  # exp2; 0 means half of iterations
    zeta: float = 0.5
    theta1: float = 0.7
    theta2: float = 0.3
    profiles: tuple[str, ...] = ("H1", "H2", "H3")  # drivers, exp1/exp2
    occupants: tuple[str, ...] = ("H1", "H2", "H3")  # exp4-exp6 (exp3 uses first two)
    fixed_setpoints: tuple[float, ...] = (70.0, 76.0)
    oracle_samples: int = 3
    eval_days: int = 5
    fcw_t_l: tuple[int, ...] = (80, 90, 100, 110)
    fcw_t_a: tuple[int, ...] = (8, 9, 10, 11, 12, 13, 14, 15)
    hvac_t_l: tuple[int, ...] = (10, 15, 20, 30)
    hvac_t_a: tuple[int, ...] = (2, 4, 6, 8, 10, 12, 14, 16)

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; valid scenarios: {', '.join(SCENARIOS)}"
            )
        if not 0.0 <= self.zeta <= 1.0:
            raise ConfigError(f"zeta={self.zeta} must be in [0, 1]")
        if not self.theta1 > self.theta2 > 0:
            raise ConfigError("need theta1 > theta2 > 0")


_PARSERS = {
    "scenario": str,
    "seed": int,
    "out_dir": str,
    "iterations": int,
    "switch_iteration": int,
    "zeta": float,
    "theta1": float,
    "theta2": float,
    "profiles": _str_list,
    "occupants": _str_list,
    "fixed_setpoints": _float_list,
    "oracle_samples": int,
    "eval_days": int,
    "fcw_t_l": _int_list,
    "fcw_t_a": _int_list,
    "hvac_t_l": _int_list,
    "hvac_t_a": _int_list,
}

_REQUIRED = ("scenario", "seed")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required key(s): {', '.join(missing)}")
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), source=str(p))


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
