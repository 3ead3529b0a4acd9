"""Imminent-collision monitoring and safe-stop trajectory pipeline."""

from .escape import EscapeCandidate, EscapeConfig, escape_cost, generate_grid, stratified_sample
from .geometry import VehicleState, vec3
from .monitor import MonitorConfig, MonitorVerdict, check_imminent, projection, stop_cost
from .obstacle_map import ObstacleMap, build_map
from .trajectory import (
    AxisBoundary,
    FeasibilityConfig,
    PolySegment,
    StopTrajectory,
    TrajectoryKind,
    check_collision_free,
    check_dynamic_feasibility,
    choose_duration,
    evaluate,
    fallback_brake,
    generate_stop_trajectory,
    solve_axis,
)

__version__ = "0.1.0"

__all__ = [
    "AxisBoundary", "EscapeCandidate", "EscapeConfig", "FeasibilityConfig",
    "MonitorConfig", "MonitorVerdict", "ObstacleMap", "PolySegment",
    "StopTrajectory", "TrajectoryKind", "VehicleState", "build_map",
    "check_collision_free", "check_dynamic_feasibility", "check_imminent",
    "choose_duration", "escape_cost", "evaluate", "fallback_brake",
    "generate_grid", "generate_stop_trajectory", "projection", "solve_axis",
    "stop_cost", "stratified_sample", "vec3",
]
