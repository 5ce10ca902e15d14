"""Shared kinematic types and the docking-success predicate.

World frame is right-handed ENU (z up). Euler angles are ZYX
(yaw-pitch-roll), stored as (roll, pitch, yaw) in radians.
"""

from dataclasses import dataclass, field

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=np.float64)


def unit(v: Vec3) -> Vec3:
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize a near-zero vector")
    return v / n


def yaw_rotation(yaw: float) -> np.ndarray:
    """World-from-body rotation about z."""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass
class BlimpState:
    position: Vec3
    velocity: Vec3
    euler: Vec3  # (roll, pitch, yaw)
    time: float = 0.0

    def copy(self) -> "BlimpState":
        return BlimpState(self.position.copy(), self.velocity.copy(),
                          self.euler.copy(), self.time)


@dataclass
class UavState:
    position: Vec3
    velocity: Vec3
    time: float = 0.0

    def copy(self) -> "UavState":
        return UavState(self.position.copy(), self.velocity.copy(), self.time)


@dataclass
class DockingCriteria:
    below_offset: float = 0.3  # m below the port
    lateral_tol: float = 0.3   # m, disk in the xy plane
    vertical_tol: float = 0.1  # m

    def __post_init__(self):
        if min(self.below_offset, self.lateral_tol, self.vertical_tol) <= 0.0:
            raise ValueError("docking criteria must be strictly positive")


def docking_target(port_position: Vec3,
                   crit: DockingCriteria | None = None) -> Vec3:
    """Point the UAV must reach: below_offset straight below the port."""
    crit = crit or DockingCriteria()
    return port_position + vec3(0.0, 0.0, -crit.below_offset)


def is_docked(uav: UavState, port_position: Vec3,
              crit: DockingCriteria | None = None) -> bool:
    crit = crit or DockingCriteria()
    err = uav.position - docking_target(port_position, crit)
    lateral = float(np.hypot(err[0], err[1]))
    return lateral <= crit.lateral_tol and abs(float(err[2])) <= crit.vertical_tol
