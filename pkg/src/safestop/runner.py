"""Batch experiment runner: seeded trials, trace logs, and summary tables."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .escape import EscapeConfig
from .monitor import MonitorConfig
from .scenarios import (
    Scenario,
    generate_forest,
    generate_two_pillar_arena,
    generate_warehouse,
)
from .simulator import (
    SimConfig,
    TrialResult,
    monitor_log_to_csv,
    run_trial,
    trace_to_csv,
)
from .trajectory import FeasibilityConfig


@dataclass
class RunConfig:
    scenario_kind: str = "forest"        # forest | warehouse | arena | file
    scenario_path: str | None = None     # for scenario_kind == "file"
    scenario_params: dict = field(default_factory=dict)
    trials: int = 10
    seed_base: int = 0
    monitoring_enabled: bool = True
    profile: str = "aggressive"
    timeout: float = 120.0
    output_dir: str = "out"
    # deep k-nearest default: dense surface maps crowd small query sets
    monitor: MonitorConfig = field(
        default_factory=lambda: MonitorConfig(k_nearest=1000))
    escape: EscapeConfig = field(default_factory=EscapeConfig)
    feasibility: FeasibilityConfig = field(default_factory=FeasibilityConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        cfg = RunConfig()
        simple = {"scenario_kind", "scenario_path", "scenario_params", "trials",
                  "seed_base", "monitoring_enabled", "profile", "timeout",
                  "output_dir"}
        for key, value in data.items():
            if key in simple:
                setattr(cfg, key, value)
            elif key == "monitor":
                cfg.monitor = MonitorConfig(**value)
            elif key == "escape":
                value = dict(value)
                if "strata" in value:
                    value["strata"] = tuple(tuple(s) for s in value["strata"])
                if "grid_half_extents" in value:
                    value["grid_half_extents"] = tuple(value["grid_half_extents"])
                cfg.escape = EscapeConfig(**value)
            elif key == "feasibility":
                cfg.feasibility = FeasibilityConfig(**value)
            elif key == "sim":
                cfg.sim = SimConfig(**value)
            else:
                raise ValueError(f"unknown run-config field: {key}")
        if cfg.trials < 1:
            raise ValueError("trials must be >= 1")
        return cfg

    @staticmethod
    def load(path: str) -> "RunConfig":
        with open(path) as f:
            return RunConfig.from_dict(json.load(f))


def build_scenario(cfg: RunConfig, seed: int) -> Scenario:
    params = dict(cfg.scenario_params)
    if cfg.scenario_kind == "forest":
        for key in ("bounds", "radius_range"):
            if key in params:
                params[key] = tuple(params[key])
        return generate_forest(seed, **params)
    if cfg.scenario_kind == "warehouse":
        for key in ("bounds", "shelf_dims"):
            if key in params:
                params[key] = tuple(params[key])
        return generate_warehouse(seed, **params)
    if cfg.scenario_kind == "arena":
        return generate_two_pillar_arena()
    if cfg.scenario_kind == "file":
        if not cfg.scenario_path or not os.path.exists(cfg.scenario_path):
            raise ValueError(f"scenario file not found: {cfg.scenario_path}")
        return Scenario.load(cfg.scenario_path)
    raise ValueError(f"unknown scenario kind: {cfg.scenario_kind}")


def _mean_sd(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) == 0:
        return float("nan"), float("nan")
    return float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0


@dataclass
class BatchSummary:
    label: str
    results: list[TrialResult]

    @property
    def success_rate(self) -> float:
        return sum(r.success for r in self.results) / len(self.results)

    def table1_row(self) -> dict:
        v = _mean_sd([r.mean_speed for r in self.results])
        d = _mean_sd([r.mean_obstacle_distance for r in self.results])
        m = _mean_sd([r.min_obstacle_distance for r in self.results])
        return {
            "label": self.label,
            "success_rate": self.success_rate,
            "velocity_mean": v[0], "velocity_sd": v[1],
            "distance_mean": d[0], "distance_sd": d[1],
            "min_distance_mean": m[0], "min_distance_sd": m[1],
        }

    def table2_row(self) -> dict:
        stops = _mean_sd([float(r.stops_issued) for r in self.results])
        speeds = [e.speed for r in self.results for e in r.stop_events]
        dists = [e.obstacle_distance for r in self.results for e in r.stop_events]
        sv = _mean_sd(speeds)
        sd = _mean_sd(dists)
        return {
            "label": self.label,
            "stops_mean": stops[0], "stops_sd": stops[1],
            "trigger_velocity_mean": sv[0], "trigger_velocity_sd": sv[1],
            "trigger_distance_mean": sd[0], "trigger_distance_sd": sd[1],
        }


def run_batch(cfg: RunConfig, write_logs: bool = True) -> BatchSummary:
    """Run cfg.trials seeded trials and (optionally) write per-trial logs."""
    label = f"{cfg.scenario_kind}-{'enabled' if cfg.monitoring_enabled else 'disabled'}"
    if write_logs:
        os.makedirs(cfg.output_dir, exist_ok=True)
    results = []
    for i in range(cfg.trials):
        seed = cfg.seed_base + i
        scenario = build_scenario(cfg, seed)
        result, world = run_trial(
            scenario, cfg.profile, cfg.monitoring_enabled, seed,
            timeout=cfg.timeout, monitor_cfg=cfg.monitor,
            escape_cfg=replace(cfg.escape, rng_seed=seed),
            feas_cfg=cfg.feasibility, sim_cfg=cfg.sim)
        results.append(result)
        if write_logs:
            stem = f"{label}_seed{seed:04d}"
            with open(os.path.join(cfg.output_dir, f"{stem}.trace.csv"), "w") as f:
                f.write(trace_to_csv(world))
            with open(os.path.join(cfg.output_dir, f"{stem}.monitor.csv"), "w") as f:
                f.write(monitor_log_to_csv(world))
    summary = BatchSummary(label, results)
    if write_logs:
        write_summary(os.path.join(cfg.output_dir, f"{label}.summary.csv"), [summary])
    return summary


SUMMARY_HEADER = (
    "label,success_rate,velocity_mean,velocity_sd,distance_mean,distance_sd,"
    "min_distance_mean,min_distance_sd,stops_mean,stops_sd,"
    "trigger_velocity_mean,trigger_velocity_sd,"
    "trigger_distance_mean,trigger_distance_sd"
)


def write_summary(path: str, summaries: list[BatchSummary]) -> None:
    lines = [SUMMARY_HEADER]
    for s in summaries:
        t1, t2 = s.table1_row(), s.table2_row()
        row = [t1["label"],
               f"{t1['success_rate']:.4f}"]
        for key in ("velocity_mean", "velocity_sd", "distance_mean",
                    "distance_sd", "min_distance_mean", "min_distance_sd"):
            row.append(f"{t1[key]:.6f}")
        for key in ("stops_mean", "stops_sd", "trigger_velocity_mean",
                    "trigger_velocity_sd", "trigger_distance_mean",
                    "trigger_distance_sd"):
            row.append(f"{t2[key]:.6f}")
        lines.append(",".join(row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
