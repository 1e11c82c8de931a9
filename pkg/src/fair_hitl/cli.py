"""Command-line entry point.

`fair-hitl run` executes one scenario per seed and writes an artifact
directory (config snapshot, trace CSVs, summary) per run; `fair-hitl
oracle` computes only the brute-force performance maps for a config;
`fair-hitl list-scenarios` prints what can be run.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as exps
from .config import SCENARIOS, ConfigError, RunConfig, load_config, serialize_config
from .governor import GovernorGrid, enumerate_governor_states
from .mediator import enumerate_weight_states

# Desk-scale iteration defaults per scenario (used when the config says 0).
DEFAULT_ITERATIONS = {
    "exp1": 3000,
    "exp2": 3000,
    "exp3": 2000,
    "exp4": 1500,
    "exp5": 1500,
    "exp6": 800,
}

SCENARIO_HELP = {
    "exp1": "driver-profile timescale convergence (collision warning)",
    "exp2": "mid-run driver switch and re-convergence (collision warning)",
    "exp3": "occupant timescale convergence (thermal house)",
    "exp4": "weight mediation without fairness (thermal house)",
    "exp5": "weight mediation with and without the fairness term",
    "exp6": "learned stack versus fixed thermostat set-points",
}


def _grids(cfg: RunConfig) -> tuple[GovernorGrid, GovernorGrid]:
    return (GovernorGrid(cfg.fcw_t_l, cfg.fcw_t_a), GovernorGrid(cfg.hvac_t_l, cfg.hvac_t_a))


def run_scenario(cfg: RunConfig) -> exps.ExperimentReport:
    """Dispatch one configured scenario and return its report."""
    iterations = cfg.iterations or DEFAULT_ITERATIONS[cfg.scenario]
    theta = (cfg.theta1, cfg.theta2)
    fcw_grid, hvac_grid = _grids(cfg)
    if cfg.scenario == "exp1":
        return exps.run_inter_human(
            "fcw", cfg.profiles, iterations, cfg.seed,
            oracle_samples=cfg.oracle_samples, grid=fcw_grid,
        )
    if cfg.scenario == "exp2":
        switch = cfg.switch_iteration or iterations // 2
        return exps.run_intra_switch(
            cfg.profiles[0], cfg.profiles[1], switch, iterations, cfg.seed,
            oracle_samples=cfg.oracle_samples,
        )
    if cfg.scenario == "exp3":
        return exps.run_inter_human(
            "hvac", cfg.occupants[:2], iterations, cfg.seed,
            params=exps.HVAC_GOVERNOR_PARAMS,
            oracle_samples=cfg.oracle_samples, theta=theta, grid=hvac_grid,
        )
    if cfg.scenario == "exp4":
        return exps.run_mediator_experiment(
            cfg.occupants, 0.0, iterations, cfg.seed,
            oracle_samples=cfg.oracle_samples, theta=theta,
        )
    if cfg.scenario == "exp5":
        return exps.run_fairness_comparison(
            cfg.occupants, iterations, cfg.seed, zeta_fair=cfg.zeta,
            oracle_samples=cfg.oracle_samples, theta=theta,
        )
    if cfg.scenario == "exp6":
        return exps.run_fixed_vs_adaptive(
            cfg.occupants, cfg.fixed_setpoints, iterations, cfg.seed,
            zeta=cfg.zeta, eval_days=cfg.eval_days, theta=theta,
        )
    raise ConfigError(f"unknown scenario {cfg.scenario!r}")


def run_oracle(cfg: RunConfig) -> exps.ExperimentReport:
    """Compute only the brute-force maps the scenario would use."""
    theta = (cfg.theta1, cfg.theta2)
    fcw_grid, hvac_grid = _grids(cfg)
    report = exps.ExperimentReport(
        scenario=f"oracle-{cfg.scenario}", seed=cfg.seed,
        config={"oracle_samples": cfg.oracle_samples},
    )
    if cfg.scenario in ("exp1", "exp2"):
        states = [s.values(fcw_grid) for s in enumerate_governor_states(fcw_grid)]
        train, evl = exps.ORACLE_SPANS["fcw"]
        for k, pid in enumerate(cfg.profiles):
            m = exps._governor_snapshot_oracle(
                "fcw", pid, states, cfg.oracle_samples, cfg.seed + 100 + k, train, evl,
            )
            report.tables[f"oracle_{pid}"] = m.csv_rows(("t_l", "t_a"))
            report.summary[pid] = {"argmax": list(m.argmax()), "max": m.max_value()}
    elif cfg.scenario == "exp3":
        states = [s.values(hvac_grid) for s in enumerate_governor_states(hvac_grid)]
        train, evl = exps.ORACLE_SPANS["hvac"]
        for k, pid in enumerate(cfg.occupants[:2]):
            m = exps._governor_snapshot_oracle(
                "hvac", pid, states, cfg.oracle_samples, cfg.seed + 100 + k, train, evl, theta,
            )
            report.tables[f"oracle_{pid}"] = m.csv_rows(("t_l", "t_a"))
            report.summary[pid] = {"argmax": list(m.argmax()), "max": m.max_value()}
    else:
        pretrained = [
            exps._pretrain_inner(pid, cfg.seed + 31 * i, 960)
            for i, pid in enumerate(cfg.occupants)
        ]
        system = exps._mediator_system_factory(
            cfg.occupants, cfg.seed, pretrained, [(10, 4)] * len(cfg.occupants), 240, theta,
        )
        exps._burn_in_mediated(system, exps.MEDIATOR_BURNIN_ITERATIONS, cfg.seed)
        m = exps._mediator_oracle(system, cfg.oracle_samples, cfg.seed + 977)
        names = tuple(f"w_{i + 1}" for i in range(len(cfg.occupants)))
        report.tables["oracle_weights"] = m.csv_rows(names)
        report.summary["weights"] = {"argmax": list(m.argmax()), "max": m.max_value()}
    return report


def _one_run(cfg: RunConfig, oracle_only: bool) -> str:
    report = run_oracle(cfg) if oracle_only else run_scenario(cfg)
    out = Path(cfg.out_dir) / f"{report.scenario}-seed{cfg.seed}"
    report.write(out, config_text=serialize_config(cfg))
    return str(out)


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "scenario", None):
        updates["scenario"] = args.scenario
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    return replace(cfg, **updates) if updates else cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fair-hitl",
        description="Deterministic experiment harness for the three-level adaptive control stack.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario, write artifacts")
    p_run.add_argument("--config", required=True, help="path to the flat key=value config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--scenario", default=None, help="override the config scenario")
    p_run.add_argument("--out", default=None, help="override the output directory")
    p_run.add_argument("--parallel", type=int, default=1,
                       help="run N consecutive seeds concurrently")

    p_oracle = sub.add_parser("oracle", help="compute brute-force maps only")
    p_oracle.add_argument("--config", required=True)
    p_oracle.add_argument("--seed", type=int, default=None)

    sub.add_parser("list-scenarios", help="print valid scenario names")

    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        for name in SCENARIOS:
            print(f"{name}: {SCENARIO_HELP[name]}")
        return 0

    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "oracle":
            out = _one_run(cfg, oracle_only=True)
            print(out)
            return 0
        if args.parallel <= 1:
            out = _one_run(cfg, oracle_only=False)
            print(out)
            return 0
        seeds = [cfg.seed + i for i in range(args.parallel)]
        configs = [replace(cfg, seed=s) for s in seeds]
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            for out in pool.map(_run_config_entry, configs):
                print(out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run_config_entry(cfg: RunConfig) -> str:
    return _one_run(cfg, oracle_only=False)


if __name__ == "__main__":
    sys.exit(main())
