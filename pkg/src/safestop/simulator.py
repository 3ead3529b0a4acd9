"""Deterministic discrete-time teleoperation world.

Runs the fixed-rate monitor / stop / recovery loop around a first-order
velocity-tracking vehicle, with scripted operator models standing in for a
human pilot. Everything is seeded; identical inputs give identical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .escape import EscapeConfig
from .geometry import VehicleState, wrap_angle
from .monitor import MonitorConfig, MonitorVerdict, check_imminent
from .obstacle_map import ObstacleMap
from .scenarios import Scenario
from .trajectory import (
    FeasibilityConfig,
    StopTrajectory,
    TrajectoryKind,
    evaluate,
    generate_stop_trajectory,
    sample_positions,
)


class Mode(str, Enum):
    TELEOP = "TELEOP"
    STOPPING = "STOPPING"
    RECOVERY = "RECOVERY"


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.02                 # s, integration tick
    velocity_tau: float = 0.3        # s, first-order command tracking lag
    tracking_accel_limit: float = 2.0  # m/s^2, platform accel saturation
    contact_radius: float = 0.15     # m, hard-contact collision threshold
    recovery_duration: float = 1.0   # s, in-place yaw after a stop
    recovery_yaw_rate: float = 1.5   # rad/s
    command_hold_timeout: float = 0.5  # s, decay external commands to zero
    timeout: float = 120.0           # s per trial


@dataclass(frozen=True)
class OperatorCommand:
    commanded_velocity: np.ndarray
    commanded_yaw_rate: float
    timestamp: float


@dataclass
class StopEvent:
    time: float
    position: np.ndarray
    speed: float
    obstacle_distance: float
    obstacle_angle: float
    fallback: bool
    obstacle_point: np.ndarray | None = None


@dataclass
class MonitorSample:
    time: float
    speed: float
    obstacle_distance: float | None
    obstacle_angle: float | None
    cost_min: float | None
    triggered: bool


@dataclass
class TrialResult:
    success: bool
    collided: bool
    timed_out: bool
    duration: float
    mean_speed: float
    mean_obstacle_distance: float
    min_obstacle_distance: float
    stops_issued: int
    stop_events: list[StopEvent]
    seed: int


OPERATOR_SPEEDS = {"aggressive": 2.0, "cautious": 1.0}
HEADING_NOISE_SIGMA = 0.2       # rad, aggressive profile
NOISE_HOLD_STEPS = 25           # resample the heading offset every 0.5 s
DETOUR_DURATION = 6.0           # s; sidestep window after a monitor stop
DETOUR_GAIN = 1.2


def scripted_operator(
    state: VehicleState,
    scenario: Scenario,
    profile: str,
    seed: int,
    step_index: int,
    obstacle_map: ObstacleMap | None = None,
    now: float = 0.0,
    last_stop: StopEvent | None = None,
) -> OperatorCommand:
    """Goal-seeking command model; deterministic in (state, seed, step)."""
    if profile not in OPERATOR_SPEEDS:
        raise ValueError(f"unknown operator profile: {profile}")
    speed = OPERATOR_SPEEDS[profile]
    to_goal = scenario.goal - state.position
    dist = float(np.linalg.norm(to_goal))
    if dist < scenario.goal_radius:
        return OperatorCommand(np.zeros(3), 0.0, now)
    direction = to_goal / dist
    if profile == "aggressive":
        # blind flight: heading noise only, held constant for short spells
        rng = np.random.default_rng((seed, step_index // NOISE_HOLD_STEPS))
        offset = rng.normal(0.0, HEADING_NOISE_SIGMA)
        cos_o, sin_o = math.cos(offset), math.sin(offset)
        dx, dy = direction[0], direction[1]
        direction = np.array([dx * cos_o - dy * sin_o,
                              dx * sin_o + dy * cos_o,
                              direction[2]])
        norm = np.linalg.norm(direction)
        if norm > 1e-12:
            direction = direction / norm
        # a stop tells the operator where the hazard is; pull around it for
        # a short spell instead of ramming the same obstacle again
        if last_stop is not None and last_stop.obstacle_point is not None \
                and now - last_stop.time < DETOUR_DURATION:
            away = state.position - last_stop.obstacle_point
            lateral = away - direction * float(np.dot(away, direction))
            n = float(np.linalg.norm(lateral))
            if n > 1e-6:
                lateral = lateral / n
            else:
                side = np.cross(direction, np.array([0.0, 0.0, 1.0]))
                sn = float(np.linalg.norm(side))
                lateral = side / sn if sn > 1e-9 else np.array([0.0, 0.0, 1.0])
            direction = direction + DETOUR_GAIN * lateral
            direction = direction / np.linalg.norm(direction)
    else:
        # cautious: potential-field bias away from the nearest obstacle
        if obstacle_map is not None and obstacle_map.point_count:
            hits = obstacle_map.k_nearest(state.position, 1, 3.0)
            if hits:
                p, d = hits[0]
                away = state.position - p
                if d > 1e-9:
                    direction = direction + (away / d) * (1.0 / max(d, 0.3)) * 0.5
                    n = np.linalg.norm(direction)
                    if n > 1e-12:
                        direction = direction / n
    cmd_speed = speed * min(1.0, dist / 1.0)
    desired_heading = math.atan2(direction[1], direction[0])
    yaw_err = wrap_angle(desired_heading - state.yaw)
    return OperatorCommand(direction * cmd_speed, float(np.clip(2.0 * yaw_err, -2.0, 2.0)), now)


class World:
    """Single-owner simulation; step sequentially."""

    def __init__(
        self,
        scenario: Scenario,
        monitor_cfg: MonitorConfig = MonitorConfig(),
        escape_cfg: EscapeConfig = EscapeConfig(),
        feas_cfg: FeasibilityConfig = FeasibilityConfig(),
        sim_cfg: SimConfig = SimConfig(),
        monitoring_enabled: bool = True,
    ):
        self.scenario = scenario
        self.obstacle_map = scenario.build_obstacle_map()
        self.monitor_cfg = monitor_cfg
        self.escape_cfg = escape_cfg
        self.feas_cfg = feas_cfg
        self.sim_cfg = sim_cfg
        self.monitoring_enabled = monitoring_enabled

        self.state = scenario.start.copy()
        self.mode = Mode.TELEOP
        self.t = 0.0
        self.step_index = 0
        self.collided = False
        self.goal_reached = False
        self.active_trajectory: StopTrajectory | None = None
        self._traj_t = 0.0
        self._recovery_left = 0.0
        self.stop_events: list[StopEvent] = []
        self.monitor_samples: list[MonitorSample] = []
        self.trace: list[dict] = []
        self.events: list[dict] = []
        self._last_cost_min: float | None = None

        # monitor every N ticks, as close to monitor_rate as the tick allows
        self._monitor_every = max(
            1, round(1.0 / (monitor_cfg.monitor_rate * sim_cfg.dt)))

    @property
    def finished(self) -> bool:
        return self.collided or self.goal_reached

    def _emit(self, kind: str, **payload) -> None:
        self.events.append({"event": kind, "t": self.t, **payload})

    def _log_tick(self, nearest: float) -> None:
        s = self.state
        self.trace.append({
            "t": self.t, "mode": self.mode.value,
            "px": s.position[0], "py": s.position[1], "pz": s.position[2],
            "vx": s.velocity[0], "vy": s.velocity[1], "vz": s.velocity[2],
            "yaw": s.yaw, "nearest_obstacle_dist": nearest,
            "stop_cost_min": self._last_cost_min,
            "stop_event": False,
        })

    def _run_monitor(self) -> None:
        verdict = check_imminent(self.state, self.obstacle_map, self.monitor_cfg)
        self._last_cost_min = verdict.worst_cost
        self.monitor_samples.append(MonitorSample(
            self.t, self.state.speed, verdict.worst_distance,
            verdict.worst_angle, verdict.worst_cost, verdict.triggered))
        if not verdict.triggered:
            return
        # derive a per-stop draw seed so successive stops explore different
        # stratum members while staying fully deterministic
        cfg = replace(self.escape_cfg,
                      rng_seed=(self.escape_cfg.rng_seed * 1_000_003
                                + self.step_index) % (2 ** 63))
        traj = generate_stop_trajectory(
            self.state, self.obstacle_map, cfg, self.feas_cfg)
        self.active_trajectory = traj
        self._traj_t = 0.0
        self.mode = Mode.STOPPING
        event = StopEvent(
            time=self.t, position=self.state.position.copy(),
            speed=self.state.speed,
            obstacle_distance=float(verdict.worst_distance),
            obstacle_angle=float(verdict.worst_angle),
            fallback=traj.kind is TrajectoryKind.FALLBACK_BRAKE,
            obstacle_point=None if verdict.worst_point is None
            else np.asarray(verdict.worst_point, dtype=np.float64).copy())
        self.stop_events.append(event)
        if self.trace:
            self.trace[-1]["stop_event"] = True
        self._emit("stop", position=self.state.position.tolist(),
                   speed=self.state.speed, fallback=event.fallback)

    def _track_command(self, cmd: OperatorCommand) -> None:
        s = self.state
        dt = self.sim_cfg.dt
        tau = self.sim_cfg.velocity_tau
        alpha = 1.0 - math.exp(-dt / tau)
        dv = alpha * (cmd.commanded_velocity - s.velocity)
        # platform accel saturation
        dv_max = self.sim_cfg.tracking_accel_limit * dt
        dv_norm = float(np.linalg.norm(dv))
        if dv_norm > dv_max:
            dv = dv * (dv_max / dv_norm)
        new_v = s.velocity + dv
        # accel/jerk from the lag model itself, so they stay bounded and
        # continuous between command steps (finite differences spike at
        # mode transitions and poison the stop solver's boundary state)
        s.acceleration = dv / dt
        s.jerk = -s.acceleration / tau
        s.velocity = new_v
        s.position = s.position + new_v * dt
        new_yaw_rate = s.yaw_rate + alpha * (cmd.commanded_yaw_rate - s.yaw_rate)
        s.yaw_accel = (new_yaw_rate - s.yaw_rate) / dt
        s.yaw_rate = new_yaw_rate
        s.yaw = wrap_angle(s.yaw + new_yaw_rate * dt)

    def _follow_trajectory(self) -> None:
        traj = self.active_trajectory
        assert traj is not None
        self._traj_t = min(self._traj_t + self.sim_cfg.dt, traj.duration)
        s = self.state
        t = self._traj_t
        s.position, yaw = evaluate(traj, t, 0)
        s.velocity, s.yaw_rate = evaluate(traj, t, 1)
        s.acceleration, s.yaw_accel = evaluate(traj, t, 2)
        s.jerk, s.yaw_jerk = evaluate(traj, t, 3)
        s.yaw = wrap_angle(yaw)
        if self._traj_t >= traj.duration - 1e-12:
            # vehicle is at rest; hold and switch to recovery
            s.velocity = np.zeros(3)
            s.acceleration = np.zeros(3)
            s.jerk = np.zeros(3)
            s.yaw_rate = s.yaw_accel = s.yaw_jerk = 0.0
            self.mode = Mode.RECOVERY
            self._recovery_left = self.sim_cfg.recovery_duration
            self.active_trajectory = None

    def _recover(self) -> None:
        s = self.state
        to_goal = self.scenario.goal - s.position
        desired = math.atan2(to_goal[1], to_goal[0])
        err = wrap_angle(desired - s.yaw)
        step = np.clip(err, -self.sim_cfg.recovery_yaw_rate * self.sim_cfg.dt,
                       self.sim_cfg.recovery_yaw_rate * self.sim_cfg.dt)
        s.yaw = wrap_angle(s.yaw + float(step))
        self._recovery_left -= self.sim_cfg.dt
        if self._recovery_left <= 1e-12:
            self.mode = Mode.TELEOP

    def step(self, command: OperatorCommand) -> None:
        """Advance one tick under the given operator command."""
        if self.finished:
            return
        if self.mode is Mode.TELEOP:
            if self.monitoring_enabled and self.step_index % self._monitor_every == 0:
                self._run_monitor()
            if self.mode is Mode.TELEOP:  # may have just switched to STOPPING
                self._track_command(command)
            else:
                self._follow_trajectory()
        elif self.mode is Mode.STOPPING:
            self._follow_trajectory()
        else:
            self._recover()

        self.t += self.sim_cfg.dt
        self.step_index += 1

        nearest = self.obstacle_map.nearest_distance(self.state.position)
        self._log_tick(nearest)
        if nearest < self.sim_cfg.contact_radius:
            self.collided = True
            self._emit("collision", position=self.state.position.tolist())
        elif float(np.linalg.norm(self.scenario.goal - self.state.position)) \
                < self.scenario.goal_radius:
            self.goal_reached = True
            self._emit("goal", position=self.state.position.tolist())


def run_trial(
    scenario: Scenario,
    profile: str,
    monitoring_enabled: bool,
    seed: int,
    timeout: float | None = None,
    monitor_cfg: MonitorConfig | None = None,
    escape_cfg: EscapeConfig | None = None,
    feas_cfg: FeasibilityConfig = FeasibilityConfig(),
    sim_cfg: SimConfig = SimConfig(),
) -> tuple[TrialResult, World]:
    """Step the world to goal, collision, or timeout; aggregate metrics."""
    if monitor_cfg is None:
        # solid surfaces are sampled densely, so a wall abeam can crowd a
        # small k-nearest set and hide an obstacle dead ahead until far too
        # close; a deep query restores the intended trigger distance
        monitor_cfg = MonitorConfig(k_nearest=1000)
    if escape_cfg is None:
        escape_cfg = EscapeConfig(rng_seed=seed)
    world = World(scenario, monitor_cfg, escape_cfg, feas_cfg, sim_cfg,
                  monitoring_enabled)
    timeout = timeout if timeout is not None else sim_cfg.timeout
    max_steps = int(round(timeout / sim_cfg.dt))
    for _ in range(max_steps):
        last_stop = world.stop_events[-1] if world.stop_events else None
        cmd = scripted_operator(world.state, scenario, profile, seed,
                                world.step_index, world.obstacle_map, world.t,
                                last_stop)
        world.step(cmd)
        if world.finished:
            break

    speeds = np.array([math.hypot(r["vx"], r["vy"], r["vz"]) for r in world.trace])
    dists = np.array([r["nearest_obstacle_dist"] for r in world.trace])
    result = TrialResult(
        success=world.goal_reached and not world.collided,
        collided=world.collided,
        timed_out=not world.finished,
        duration=world.t,
        mean_speed=float(speeds.mean()) if len(speeds) else 0.0,
        mean_obstacle_distance=float(dists.mean()) if len(dists) else float("inf"),
        min_obstacle_distance=float(dists.min()) if len(dists) else float("inf"),
        stops_issued=len(world.stop_events),
        stop_events=world.stop_events,
        seed=seed,
    )
    return result, world


TRACE_HEADER = ("t,mode,px,py,pz,vx,vy,vz,yaw,"
                "nearest_obstacle_dist,stop_cost_min,stop_event")


def trace_to_csv(world: World) -> str:
    lines = [TRACE_HEADER]
    for r in world.trace:
        cost = "" if r["stop_cost_min"] is None else f"{r['stop_cost_min']:.6f}"
        lines.append(
            f"{r['t']:.4f},{r['mode']},"
            f"{r['px']:.6f},{r['py']:.6f},{r['pz']:.6f},"
            f"{r['vx']:.6f},{r['vy']:.6f},{r['vz']:.6f},"
            f"{r['yaw']:.6f},{r['nearest_obstacle_dist']:.6f},{cost},"
            f"{int(r['stop_event'])}")
    return "\n".join(lines) + "\n"


MONITOR_HEADER = "t,speed,obstacle_distance,obstacle_angle,cost_min,triggered"


def monitor_log_to_csv(world: World) -> str:
    lines = [MONITOR_HEADER]
    for m in world.monitor_samples:
        d = "" if m.obstacle_distance is None else f"{m.obstacle_distance:.6f}"
        a = "" if m.obstacle_angle is None else f"{m.obstacle_angle:.6f}"
        c = "" if m.cost_min is None else f"{m.cost_min:.6f}"
        lines.append(f"{m.time:.4f},{m.speed:.6f},{d},{a},{c},{int(m.triggered)}")
    return "\n".join(lines) + "\n"
