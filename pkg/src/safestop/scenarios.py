"""Scenario definitions: bounded worlds of cylinder/box solids.

Solids are surface-sampled into point clouds for the obstacle map; the
generators are fully deterministic in their seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import VehicleState, vec3
from .obstacle_map import ObstacleMap, build_map

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Cylinder:
    center: tuple[float, float, float]  # base center (z = bottom)
    radius: float
    height: float

    def surface_points(self, spacing: float) -> np.ndarray:
        n_theta = max(8, int(np.ceil(2 * np.pi * self.radius / spacing)))
        n_z = max(2, int(np.ceil(self.height / spacing)) + 1)
        theta = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
        zs = np.linspace(0, self.height, n_z)
        cx, cy, cz = self.center
        ring = np.column_stack([
            cx + self.radius * np.cos(theta),
            cy + self.radius * np.sin(theta),
        ])
        pts = [np.column_stack([ring, np.full(n_theta, cz + z)]) for z in zs]
        return np.vstack(pts)

    def distance(self, p: np.ndarray) -> float:
        """Distance from p to the solid (0 inside)."""
        cx, cy, cz = self.center
        dr = max(0.0, float(np.hypot(p[0] - cx, p[1] - cy)) - self.radius)
        dz = max(0.0, cz - p[2], p[2] - (cz + self.height))
        return float(np.hypot(dr, dz))


@dataclass(frozen=True)
class BoxSolid:
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]

    def surface_points(self, spacing: float) -> np.ndarray:
        c = np.asarray(self.center)
        h = np.asarray(self.half_extents)
        pts = []
        for axis in range(3):
            u, v = [a for a in range(3) if a != axis]
            us = np.linspace(-h[u], h[u], max(2, int(np.ceil(2 * h[u] / spacing)) + 1))
            vs = np.linspace(-h[v], h[v], max(2, int(np.ceil(2 * h[v] / spacing)) + 1))
            uu, vv = np.meshgrid(us, vs)
            for sign in (-1.0, 1.0):
                face = np.zeros((uu.size, 3))
                face[:, axis] = sign * h[axis]
                face[:, u] = uu.ravel()
                face[:, v] = vv.ravel()
                pts.append(c + face)
        return np.unique(np.vstack(pts), axis=0)

    def distance(self, p: np.ndarray) -> float:
        d = np.abs(np.asarray(p) - np.asarray(self.center)) - np.asarray(self.half_extents)
        return float(np.linalg.norm(np.maximum(d, 0.0)))


Solid = Cylinder | BoxSolid


@dataclass
class Scenario:
    name: str
    bounds_min: tuple[float, float, float]
    bounds_max: tuple[float, float, float]
    solids: list[Solid]
    start: VehicleState
    goal: np.ndarray
    goal_radius: float = 0.8
    surface_sample_spacing: float = 0.1

    def build_obstacle_map(self) -> ObstacleMap:
        clouds = [s.surface_points(self.surface_sample_spacing) for s in self.solids]
        if not clouds:
            return build_map(np.empty((0, 3)))
        return build_map(np.vstack(clouds))

    def solid_distance(self, p: np.ndarray) -> float:
        if not self.solids:
            return float("inf")
        return min(s.distance(p) for s in self.solids)

    def to_dict(self) -> dict:
        solids = []
        for s in self.solids:
            if isinstance(s, Cylinder):
                solids.append({"cylinder": {"center": list(s.center),
                                            "radius": s.radius, "height": s.height}})
            else:
                solids.append({"box": {"center": list(s.center),
                                       "half_extents": list(s.half_extents)}})
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "bounds_min": list(self.bounds_min),
            "bounds_max": list(self.bounds_max),
            "solids": solids,
            "start": {
                "position": self.start.position.tolist(),
                "velocity": self.start.velocity.tolist(),
                "yaw": self.start.yaw,
            },
            "goal": self.goal.tolist(),
            "goal_radius": self.goal_radius,
            "surface_sample_spacing": self.surface_sample_spacing,
        }

    @staticmethod
    def from_dict(data: dict) -> "Scenario":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported scenario schema: {data.get('schema')}")
        solids: list[Solid] = []
        for entry in data["solids"]:
            if "cylinder" in entry:
                c = entry["cylinder"]
                solids.append(Cylinder(tuple(c["center"]), c["radius"], c["height"]))
            elif "box" in entry:
                b = entry["box"]
                solids.append(BoxSolid(tuple(b["center"]), tuple(b["half_extents"])))
            else:
                raise ValueError(f"unknown solid entry: {entry}")
        s = data["start"]
        start = VehicleState(
            position=np.asarray(s["position"], dtype=np.float64),
            velocity=np.asarray(s.get("velocity", [0, 0, 0]), dtype=np.float64),
            yaw=float(s.get("yaw", 0.0)),
        )
        return Scenario(
            name=data["name"],
            bounds_min=tuple(data["bounds_min"]),
            bounds_max=tuple(data["bounds_max"]),
            solids=solids,
            start=start,
            goal=np.asarray(data["goal"], dtype=np.float64),
            goal_radius=float(data.get("goal_radius", 0.8)),
            surface_sample_spacing=float(data.get("surface_sample_spacing", 0.1)),
        )

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @staticmethod
    def load(path: str) -> "Scenario":
        with open(path) as f:
            return Scenario.from_dict(json.load(f))


class GenerationError(RuntimeError):
    pass


def _hover_state(position: np.ndarray, yaw: float = 0.0) -> VehicleState:
    return VehicleState(position=position, yaw=yaw)


def generate_forest(
    seed: int,
    bounds: tuple[float, float] = (40.0, 40.0),
    tree_density: float = 0.06,
    radius_range: tuple[float, float] = (0.15, 0.35),
    height: float = 3.0,
    clear_radius: float = 1.5,
    max_attempts_per_tree: int = 200,
) -> Scenario:
    """Random cylinder forest; start and goal on opposite x sides."""
    w, d = bounds
    n_trees = int(round(tree_density * w * d))
    rng = np.random.default_rng(seed)
    fly_z = height / 2.0
    start_pos = vec3(1.5, d / 2.0, fly_z)
    goal = vec3(w - 1.5, d / 2.0, fly_z)
    placed: list[Cylinder] = []
    for _ in range(n_trees):
        for attempt in range(max_attempts_per_tree):
            x = rng.uniform(0.0, w)
            y = rng.uniform(0.0, d)
            r = rng.uniform(*radius_range)
            if np.hypot(x - start_pos[0], y - start_pos[1]) < clear_radius + r:
                continue
            if np.hypot(x - goal[0], y - goal[1]) < clear_radius + r:
                continue
            if any(np.hypot(x - c.center[0], y - c.center[1]) < r + c.radius
                   for c in placed):
                continue
            placed.append(Cylinder((x, y, 0.0), r, height))
            break
        else:
            raise GenerationError(
                f"could not place tree {len(placed) + 1}/{n_trees} "
                f"after {max_attempts_per_tree} attempts")
    return Scenario(
        name=f"forest-{seed}",
        bounds_min=(0.0, 0.0, 0.0),
        bounds_max=(w, d, height),
        solids=list(placed),
        start=_hover_state(start_pos),
        goal=goal,
    )


def generate_warehouse(
    seed: int,
    bounds: tuple[float, float] = (30.0, 14.0),
    aisle_width: float = 2.8,
    shelf_dims: tuple[float, float, float] = (4.0, 1.0, 3.0),
    clearance_radius: float = 0.3,
    gap_jitter: float = 0.5,
) -> Scenario:
    """Shelf rows along x separated by aisles; travel is end to end."""
    if aisle_width <= 2.0 * clearance_radius:
        raise GenerationError("aisle too narrow for the vehicle clearance")
    w, d = bounds
    sx, sy, sz = shelf_dims
    rng = np.random.default_rng(seed)
    pitch = sy + aisle_width
    n_rows = int((d - aisle_width) // pitch)
    if n_rows < 2:
        raise GenerationError("bounds too small for two shelf rows")
    solids: list[Solid] = []
    row_ys = []
    y0 = (d - ((n_rows - 1) * pitch)) / 2.0
    for i in range(n_rows):
        row_ys.append(y0 + i * pitch)
    margin = 2.5  # open space at both ends for start/goal
    for y in row_ys:
        x = margin
        while x + sx <= w - margin:
            solids.append(BoxSolid((x + sx / 2.0, y, sz / 2.0), (sx / 2, sy / 2, sz / 2)))
            x += sx + max(0.0, rng.uniform(0.0, gap_jitter))
    # travel down the central aisle
    aisle_y = (row_ys[n_rows // 2 - 1] + row_ys[n_rows // 2]) / 2.0
    fly_z = sz / 2.0
    # full-height support columns stand in the aisle, offset just off the
    # centerline: straight-line flight is blocked several times over but a
    # gap wide enough to stop in always remains on the far side
    column_radius = 0.3
    column_pitch = 5.0
    x = margin + rng.uniform(1.0, column_pitch)
    while x < w - margin - 2.0:
        side = 1.0 if rng.uniform() < 0.5 else -1.0
        offset = rng.uniform(0.0, column_radius)
        solids.append(Cylinder((x, aisle_y + side * offset, 0.0),
                               column_radius, sz))
        x += rng.uniform(0.75, 1.25) * column_pitch
    start_pos = vec3(1.0, aisle_y, fly_z)
    goal = vec3(w - 1.0, aisle_y, fly_z)
    return Scenario(
        name=f"warehouse-{seed}",
        bounds_min=(0.0, 0.0, 0.0),
        bounds_max=(w, d, sz),
        solids=solids,
        start=_hover_state(start_pos),
        goal=goal,
    )


def generate_two_pillar_arena() -> Scenario:
    """Fixed 8 m x 8 m arena with two pillars 2.5 m apart."""
    height = 3.0
    fly_z = 1.5
    pillars = [
        Cylinder((4.0, 4.0 - 1.25, 0.0), 0.3, height),
        Cylinder((4.0, 4.0 + 1.25, 0.0), 0.3, height),
    ]
    return Scenario(
        name="two-pillar-arena",
        bounds_min=(0.0, 0.0, 0.0),
        bounds_max=(8.0, 8.0, height),
        solids=pillars,
        start=_hover_state(vec3(1.0, 4.0, fly_z)),
        goal=vec3(7.0, 4.0, fly_z),
    )
