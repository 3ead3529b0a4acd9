"""Polynomial stopping-trajectory generation.

Each axis gets a degree-7 polynomial pinned by eight boundary constraints:
position/velocity/acceleration/jerk at t=0 and position at t=T with all
derivatives through jerk zero at T. Candidate escape points are tried in
cost order; the first trajectory passing the collision and acceleration
checks wins, with a goal-free constant-deceleration brake as the fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as P

from .escape import EscapeConfig, cost_candidates, generate_grid, stratified_sample
from .geometry import VehicleState, unit
from .obstacle_map import ObstacleMap

NUM_COEFFS = 8


@dataclass(frozen=True)
class FeasibilityConfig:
    accel_bound: float = 10.0       # m/s^2, strict bound on accel norm
    clearance_radius: float = 0.3   # m
    clearance_incursion: float = 0.1  # m, allowed dip when already close
    clearance_floor: float = 0.16   # m, hard floor just above contact
    sample_dt: float = 0.02         # s
    min_duration: float = 0.5       # s
    max_duration: float = 2.5       # s; long stops reverse the initial
                                    # acceleration too slowly and overshoot
    duration_speed_floor: float = 0.5  # m/s
    distance_time_factor: float = 1.5
    brake_fraction: float = 0.5     # fallback decel = brake_fraction * accel_bound

    def __post_init__(self) -> None:
        if min(self.accel_bound, self.clearance_radius, self.sample_dt,
               self.min_duration) <= 0:
            raise ValueError("feasibility parameters must be positive")


@dataclass(frozen=True)
class AxisBoundary:
    p0: float
    v0: float
    a0: float
    j0: float
    pf: float
    T: float

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ValueError("duration must be positive")
        vals = (self.p0, self.v0, self.a0, self.j0, self.pf, self.T)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("boundary values must be finite")


@dataclass
class PolySegment:
    """c0..c7 in ascending powers of t, valid on [0, duration]."""

    coefficients: np.ndarray
    duration: float

    def eval(self, t: np.ndarray | float, order: int = 0) -> np.ndarray | float:
        c = self.coefficients
        for _ in range(order):
            c = P.polyder(c)
        return P.polyval(t, c)


class TrajectoryKind(str, Enum):
    POLYNOMIAL = "polynomial"
    FALLBACK_BRAKE = "fallback_brake"


@dataclass
class StopTrajectory:
    axes: tuple[PolySegment, PolySegment, PolySegment, PolySegment]  # x, y, z, yaw
    kind: TrajectoryKind
    escape_point: np.ndarray | None = None

    @property
    def duration(self) -> float:
        return self.axes[0].duration


# rows of the constraint matrix in normalized time tau = t/T
def _constraint_matrix() -> np.ndarray:
    A = np.zeros((NUM_COEFFS, NUM_COEFFS))
    for k in range(4):                       # derivative k at tau = 0
        A[k, k] = math.factorial(k)
    for k in range(4):                       # derivative k at tau = 1
        for i in range(k, NUM_COEFFS):
            A[4 + k, i] = math.factorial(i) / math.factorial(i - k)
    return A


_A = _constraint_matrix()
_A_INV = np.linalg.inv(_A)


def solve_axis(boundary: AxisBoundary) -> PolySegment:
    """Unique degree-7 polynomial meeting the eight boundary constraints."""
    T = boundary.T
    # solve in tau = t/T to keep the system well-conditioned for large T
    b = np.array([
        boundary.p0, boundary.v0 * T, boundary.a0 * T**2, boundary.j0 * T**3,
        boundary.pf, 0.0, 0.0, 0.0,
    ])
    c_tau = _A_INV @ b
    if not np.all(np.isfinite(c_tau)):
        raise ArithmeticError("axis solve produced non-finite coefficients")
    scale = T ** -np.arange(NUM_COEFFS, dtype=np.float64)
    return PolySegment(c_tau * scale, T)


def choose_duration(
    state: VehicleState, escape: np.ndarray, cfg: FeasibilityConfig
) -> float:
    """Stop duration: long enough to reach the goal and to shed speed."""
    speed = state.speed
    if speed < 1e-12:
        raise ValueError("duration undefined for zero velocity")
    dist = float(np.linalg.norm(np.asarray(escape) - state.position))
    reach = cfg.distance_time_factor * dist / max(speed, cfg.duration_speed_floor)
    return max(
        cfg.min_duration,
        min(reach, cfg.max_duration),
        speed / (cfg.brake_fraction * cfg.accel_bound),
    )


def evaluate(traj: StopTrajectory, t: float, order: int = 0) -> tuple[np.ndarray, float]:
    """(translation vector, yaw value) of the order-th derivative at t."""
    if t < -1e-12 or t > traj.duration + 1e-12:
        raise ValueError(f"t={t} outside [0, {traj.duration}]")
    t = min(max(t, 0.0), traj.duration)
    xyz = np.array([traj.axes[i].eval(t, order) for i in range(3)])
    return xyz, float(traj.axes[3].eval(t, order))


def _sample_times(T: float, dt: float) -> np.ndarray:
    ts = np.arange(0.0, T + dt * 0.5, dt)
    if len(ts) == 0 or ts[-1] < T - 1e-12:
        ts = np.append(ts, T)
    return np.minimum(ts, T)


def sample_positions(traj: StopTrajectory, dt: float) -> tuple[np.ndarray, np.ndarray]:
    ts = _sample_times(traj.duration, dt)
    pos = np.column_stack([traj.axes[i].eval(ts) for i in range(3)])
    return ts, pos


def check_collision_free(
    traj: StopTrajectory, obstacle_map: ObstacleMap, cfg: FeasibilityConfig
) -> bool:
    _, pos = sample_positions(traj, cfg.sample_dt)
    return bool(np.all(obstacle_map.nearest_distances(pos) >= cfg.clearance_radius))


def check_dynamic_feasibility(traj: StopTrajectory, cfg: FeasibilityConfig) -> bool:
    ts = _sample_times(traj.duration, cfg.sample_dt)
    acc = np.column_stack([traj.axes[i].eval(ts, 2) for i in range(3)])
    return bool(np.all(np.linalg.norm(acc, axis=1) < cfg.accel_bound))


def _solve_to_point(
    state: VehicleState, escape: np.ndarray, yaw_target: float, T: float
) -> StopTrajectory:
    segs = []
    for i in range(3):
        segs.append(solve_axis(AxisBoundary(
            state.position[i], state.velocity[i], state.acceleration[i],
            state.jerk[i], float(escape[i]), T,
        )))
    segs.append(solve_axis(AxisBoundary(
        state.yaw, state.yaw_rate, state.yaw_accel, state.yaw_jerk,
        yaw_target, T,
    )))
    return StopTrajectory(tuple(segs), TrajectoryKind.POLYNOMIAL,
                          np.asarray(escape, dtype=np.float64).copy())


def fallback_brake(state: VehicleState, cfg: FeasibilityConfig) -> StopTrajectory:
    """Goal-free constant-deceleration straight-line stop."""
    speed = state.speed
    decel = cfg.brake_fraction * cfg.accel_bound
    if speed < 1e-12:
        T = 0.0
        segs = [PolySegment(np.array([state.position[i]] + [0.0] * 7), T)
                for i in range(3)]
    else:
        T = speed / decel
        vhat = unit(state.velocity)
        segs = []
        for i in range(3):
            c = np.zeros(NUM_COEFFS)
            c[0] = state.position[i]
            c[1] = state.velocity[i]
            c[2] = -0.5 * decel * vhat[i]
            segs.append(PolySegment(c, T))
    yaw = np.zeros(NUM_COEFFS)
    yaw[0] = state.yaw
    segs.append(PolySegment(yaw, T))
    return StopTrajectory(tuple(segs), TrajectoryKind.FALLBACK_BRAKE, None)


def generate_stop_trajectory(
    state: VehicleState,
    obstacle_map: ObstacleMap,
    escape_cfg: EscapeConfig,
    feas_cfg: FeasibilityConfig,
) -> StopTrajectory:
    """First safe and dynamically feasible stop, searched in cost order."""
    if state.speed < 1e-12:
        return fallback_brake(state, feas_cfg)
    grid = generate_grid(state, escape_cfg)
    candidates = cost_candidates(state, grid, obstacle_map, escape_cfg)
    sampled = stratified_sample(candidates, escape_cfg)
    solved: list[list[StopTrajectory]] = []
    for cand in sampled:
        T0 = choose_duration(state, cand.point, feas_cfg)
        # nearby escape points can draw a duration too short for the accel
        # bound; a stretched retry shaves the peak without much extra drift
        durations = []
        for T in (T0, 1.4 * T0, 2.0 * T0):
            T = min(T, feas_cfg.max_duration)
            if T not in durations:
                durations.append(T)
        solved.append([_solve_to_point(state, cand.point, state.yaw, T)
                       for T in durations])
    # two passes: prefer the full clearance margin, but a slightly dipping
    # lateral escape still beats braking straight at the obstacle
    for check_cfg in _clearance_schedule(state, obstacle_map, feas_cfg):
        for trajs in solved:
            for traj in trajs:
                if check_dynamic_feasibility(traj, check_cfg) and \
                        check_collision_free(traj, obstacle_map, check_cfg):
                    return traj
    return fallback_brake(state, feas_cfg)


def _clearance_schedule(
    state: VehicleState, obstacle_map: ObstacleMap, cfg: FeasibilityConfig
) -> list[FeasibilityConfig]:
    schedule = []
    d0 = obstacle_map.nearest_distance(state.position)
    if d0 >= cfg.clearance_radius:
        schedule.append(cfg)
    relaxed = effective_feasibility(state, obstacle_map, cfg)
    if relaxed.clearance_radius < cfg.clearance_radius:
        schedule.append(relaxed)
    return schedule


def effective_feasibility(
    state: VehicleState, obstacle_map: ObstacleMap, cfg: FeasibilityConfig
) -> FeasibilityConfig:
    """Loosest clearance gate the candidate search is allowed to accept.

    When the vehicle is close to an obstacle with velocity pointing at it
    (e.g. a late trigger braked it there), requiring the full margin is
    unsatisfiable: any stop must dip closer before it can curve away.
    Allow a bounded incursion below the current clearance (or below the
    nominal margin when already near it), but never below a hard floor
    just above hard contact.
    """
    d0 = obstacle_map.nearest_distance(state.position)
    relaxed = max(cfg.clearance_floor,
                  min(cfg.clearance_radius, d0) - cfg.clearance_incursion)
    return replace(cfg, clearance_radius=min(cfg.clearance_radius, relaxed))


def export_samples(traj: StopTrajectory, dt: float) -> str:
    """CSV rows (t, position, velocity, acceleration, yaw) at dt spacing."""
    ts = _sample_times(traj.duration, dt)
    lines = ["t,px,py,pz,vx,vy,vz,ax,ay,az,yaw"]
    for t in ts:
        vals = [f"{t:.6f}"]
        for order in (0, 1, 2):
            xyz, _ = evaluate(traj, float(t), order)
            vals.extend(f"{v:.6f}" for v in xyz)
        _, yaw = evaluate(traj, float(t), 0)
        vals.append(f"{yaw:.6f}")
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"
