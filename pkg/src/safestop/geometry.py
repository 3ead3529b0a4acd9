"""Core geometric types: 3D vectors and the full vehicle state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """Build a finite 3-vector (float64)."""
    v = np.array([x, y, z], dtype=np.float64)
    check_finite(v)
    return v


def check_finite(v: np.ndarray, name: str = "vector") -> None:
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite components: {v}")


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize; raises on (near-)zero input."""
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass
class VehicleState:
    """Translational state up to jerk plus yaw and its derivatives.

    Position in m, velocity m/s, acceleration m/s^2, jerk m/s^3; yaw in
    radians wrapped to (-pi, pi].
    """

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))
    jerk: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    yaw_rate: float = 0.0
    yaw_accel: float = 0.0
    yaw_jerk: float = 0.0

    def __post_init__(self) -> None:
        for name in ("position", "velocity", "acceleration", "jerk"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            check_finite(v, name)
            setattr(self, name, v)
        for name in ("yaw", "yaw_rate", "yaw_accel", "yaw_jerk"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")
        self.yaw = wrap_angle(self.yaw)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def copy(self) -> "VehicleState":
        return VehicleState(
            self.position.copy(), self.velocity.copy(),
            self.acceleration.copy(), self.jerk.copy(),
            self.yaw, self.yaw_rate, self.yaw_accel, self.yaw_jerk,
        )
