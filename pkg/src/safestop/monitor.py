"""Imminent-collision monitor.

Evaluates a combined stop criterion over the nearby obstacle points and
triggers stop-trajectory generation when any point scores below threshold.
The criterion mixes obstacle distance, vehicle speed, and the angular offset
between the velocity and the obstacle direction:

    cost(p) = w1 * |p - x|  -  w2 * |v|  +  w3 * arccos(cos_angle)

Lower cost means more dangerous; a stop is issued when min cost < beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import VehicleState
from .obstacle_map import ObstacleMap


@dataclass(frozen=True)
class MonitorConfig:
    w1: float = 0.6
    w2: float = 0.4
    w3: float = 1.2
    beta: float = 0.3
    monitor_rate: float = 20.0          # Hz
    k_nearest: int = 50
    query_radius: float = 5.0           # m
    min_speed: float = 0.05             # m/s, below this never trigger

    def __post_init__(self) -> None:
        if min(self.w1, self.w2, self.w3) < 0:
            raise ValueError("weights must be non-negative")
        if self.monitor_rate <= 0:
            raise ValueError("monitor_rate must be positive")
        if self.min_speed <= 0:
            raise ValueError("min_speed must be positive")


@dataclass
class MonitorVerdict:
    triggered: bool
    worst_point: np.ndarray | None = None
    worst_cost: float | None = None
    evaluated_count: int = 0
    # angle/distance of the lowest-cost point, for logging (None if no points)
    worst_distance: float | None = None
    worst_angle: float | None = None


def projection(state: VehicleState, p: np.ndarray) -> float:
    """Cosine of the angle between the velocity and the vector to p."""
    v = state.velocity
    r = np.asarray(p, dtype=np.float64) - state.position
    nv = np.linalg.norm(v)
    nr = np.linalg.norm(r)
    if nv < 1e-12 or nr < 1e-12:
        raise ValueError("projection undefined for zero velocity or p == position")
    return float(np.dot(v, r) / (nv * nr))


def stop_cost(state: VehicleState, p: np.ndarray, cfg: MonitorConfig) -> float:
    """Stop criterion for one obstacle point (requires projection >= 0)."""
    proj = projection(state, p)
    if proj < 0:
        raise ValueError("stop_cost requires projection >= 0 (filter upstream)")
    r = np.linalg.norm(np.asarray(p, dtype=np.float64) - state.position)
    angle = float(np.arccos(np.clip(proj, -1.0, 1.0)))
    return cfg.w1 * float(r) - cfg.w2 * state.speed + cfg.w3 * angle


def check_imminent(
    state: VehicleState, obstacle_map: ObstacleMap, cfg: MonitorConfig
) -> MonitorVerdict:
    """Evaluate the stop criterion over the k-nearest in-radius points."""
    speed = state.speed
    if speed < cfg.min_speed:
        return MonitorVerdict(triggered=False, evaluated_count=0)

    idx, dist = obstacle_map.k_nearest_indices(
        state.position, cfg.k_nearest, cfg.query_radius
    )
    if len(idx) == 0:
        return MonitorVerdict(triggered=False, evaluated_count=0)

    pts = obstacle_map.points[idx]
    rel = pts - state.position
    # drop coincident points before normalizing
    ok = dist > 1e-12
    idx, dist, rel = idx[ok], dist[ok], rel[ok]
    if len(idx) == 0:
        return MonitorVerdict(triggered=False, evaluated_count=0)

    vhat = state.velocity / speed
    proj = rel @ vhat / dist
    ahead = proj >= 0.0
    idx, dist, proj = idx[ahead], dist[ahead], proj[ahead]
    if len(idx) == 0:
        return MonitorVerdict(triggered=False, evaluated_count=0)

    angles = np.arccos(np.clip(proj, -1.0, 1.0))
    costs = cfg.w1 * dist - cfg.w2 * speed + cfg.w3 * angles
    best = np.lexsort((idx, dist, costs))[0]
    worst_cost = float(costs[best])
    return MonitorVerdict(
        triggered=worst_cost < cfg.beta,
        worst_point=obstacle_map.points[idx[best]].copy(),
        worst_cost=worst_cost,
        evaluated_count=int(len(idx)),
        worst_distance=float(dist[best]),
        worst_angle=float(angles[best]),
    )
