"""Escape-point generation, costing, and stratified downsampling.

Candidate stop goals are laid out on a velocity-aligned 3D lattice ahead of
the vehicle, costed by offset from the velocity line (q) and clearance to
the nearest obstacle (d), then downsampled by drawing fixed counts from
cost-ordered percentile bands so both cheap and expensive candidates
survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import VehicleState, unit
from .obstacle_map import ObstacleMap

# cost stand-in for infinite clearance (empty map); keeps sorting total
_FREE_SPACE_BONUS = 1e9


@dataclass(frozen=True)
class EscapeConfig:
    we1: float = 1.0            # weight on line offset q
    we2: float = 1.5            # weight on obstacle clearance d
    grid_half_extents: tuple[float, float, float] = (2.0, 2.0, 1.0)  # m
    grid_spacing: float = 0.25  # m
    velocity_scale: float = 0.5  # s; box grows by this per m/s of speed
    strata: tuple[tuple[float, int], ...] = (
        (0.01, 10), (0.09, 40), (0.40, 30), (0.50, 20),
    )
    clearance_radius: float = 0.6  # m; candidates closer than this collide
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if abs(sum(f for f, _ in self.strata) - 1.0) > 1e-9:
            raise ValueError("strata fractions must sum to 1.0")
        if any(c <= 0 for _, c in self.strata):
            raise ValueError("strata sample counts must be positive")
        if self.grid_spacing <= 0:
            raise ValueError("grid_spacing must be positive")


@dataclass
class EscapeCandidate:
    point: np.ndarray
    line_offset: float      # q, m
    clearance: float        # d, m
    cost: float
    colliding: bool
    lattice_index: int = 0  # position in grid emission order, for tie-breaks


def velocity_frame(state: VehicleState) -> np.ndarray:
    """Right-handed frame with x = direction of motion; rows are axes."""
    fwd = unit(state.velocity)
    up_hint = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(fwd, up_hint)) > 0.99:
        up_hint = np.array([1.0, 0.0, 0.0])
    right = unit(np.cross(fwd, up_hint))
    up = np.cross(right, fwd)
    return np.vstack([fwd, right, up])


def _axis_offsets(half: float, spacing: float) -> np.ndarray:
    count = int(np.floor(2.0 * half / spacing + 1e-9)) + 1
    return -half + spacing * np.arange(count)


def generate_grid(state: VehicleState, cfg: EscapeConfig) -> np.ndarray:
    """Uniform velocity-aligned lattice ahead of the vehicle, (N, 3)."""
    speed = state.speed
    if speed < 1e-12:
        raise ValueError("escape grid undefined for zero velocity")
    frame = velocity_frame(state)
    half = np.asarray(cfg.grid_half_extents) * (1.0 + cfg.velocity_scale * speed)
    offs = [_axis_offsets(h, cfg.grid_spacing) for h in half]
    fwd, lat, vert = np.meshgrid(offs[0], offs[1], offs[2], indexing="ij")
    local = np.column_stack([fwd.ravel(), lat.ravel(), vert.ravel()])
    # box center sits one forward half-extent ahead of the vehicle
    center = state.position + frame[0] * half[0]
    pts = center + local @ frame
    rel = pts - state.position
    along = rel @ frame[0]
    dist = np.linalg.norm(rel, axis=1)
    keep = (dist > 1e-12) & (along >= -1e-12)
    return pts[keep]


def cost_candidates(
    state: VehicleState, points: np.ndarray, obstacle_map: ObstacleMap,
    cfg: EscapeConfig,
) -> list[EscapeCandidate]:
    """Cost a batch of candidate points (vectorized clearance queries)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        return []
    vhat = unit(state.velocity)
    rel = points - state.position
    q = np.linalg.norm(rel - np.outer(rel @ vhat, vhat), axis=1)
    d = obstacle_map.nearest_distances(points)
    clearance_term = np.where(np.isinf(d), _FREE_SPACE_BONUS, cfg.we2 * d)
    cost = cfg.we1 * q - clearance_term
    colliding = d < cfg.clearance_radius
    return [
        EscapeCandidate(points[i].copy(), float(q[i]), float(d[i]),
                        float(cost[i]), bool(colliding[i]), i)
        for i in range(len(points))
    ]


def escape_cost(
    state: VehicleState, e: np.ndarray, obstacle_map: ObstacleMap,
    cfg: EscapeConfig,
) -> EscapeCandidate:
    return cost_candidates(state, np.asarray(e).reshape(1, 3), obstacle_map, cfg)[0]


def _stratum_bounds(n: int, fractions: list[float]) -> list[int]:
    bounds, cum = [], 0.0
    for f in fractions:
        cum += f
        bounds.append(int(round(cum * n)))
    bounds[-1] = n
    return bounds


def stratified_sample(
    candidates: list[EscapeCandidate], cfg: EscapeConfig
) -> list[EscapeCandidate]:
    """Draw fixed counts per cost-ordered stratum, without replacement.

    Colliding candidates are discarded first; draw counts clamp to stratum
    size. Result is sorted ascending by cost.
    """
    alive = [c for c in candidates if not c.colliding]
    if not alive:
        return []
    alive.sort(key=lambda c: (c.cost, c.line_offset, c.lattice_index))
    bounds = _stratum_bounds(len(alive), [f for f, _ in cfg.strata])
    rng = np.random.default_rng(cfg.rng_seed)
    chosen: list[EscapeCandidate] = []
    start = 0
    for (_, count), end in zip(cfg.strata, bounds):
        stratum = alive[start:end]
        start = end
        if not stratum:
            continue
        take = min(count, len(stratum))
        picks = rng.choice(len(stratum), size=take, replace=False)
        chosen.extend(stratum[i] for i in picks)
    chosen.sort(key=lambda c: (c.cost, c.line_offset, c.lattice_index))
    return chosen
