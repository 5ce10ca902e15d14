"""1-cos wind gust events: evaluation and direction sampling."""

from dataclasses import dataclass

import numpy as np

from .world import Vec3, vec3


@dataclass
class GustEvent:
    t1: float          # onset [s]
    T_g: float         # duration [s]
    v_max: float       # peak speed [m/s]
    direction: Vec3    # unit vector

    def __post_init__(self):
        if self.T_g <= 0.0:
            raise ValueError("gust duration must be positive")
        if self.v_max < 0.0:
            raise ValueError("gust peak speed must be non-negative")
        n = float(np.linalg.norm(self.direction))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"gust direction must be unit length, got {n}")


def gust_speed(event: GustEvent, t: float) -> float:
    """Scalar 1-cos profile: 0 outside [t1, t1+T_g], peak v_max at midpoint."""
    if t < event.t1 or t > event.t1 + event.T_g:
        return 0.0
    return 0.5 * event.v_max * (1.0 - np.cos(2.0 * np.pi * (t - event.t1) / event.T_g))


def gust_velocity(event: GustEvent, t: float) -> Vec3:
    return gust_speed(event, t) * event.direction


def sample_direction_uniform(rng: np.random.Generator) -> Vec3:
    """Unit direction from component-wise U[-1,1]; redraw near-zero vectors."""
    while True:
        v = rng.uniform(-1.0, 1.0, size=3)
        n = float(np.linalg.norm(v))
        if n >= 1e-6:
            return v / n


def sample_directions_equidistant(n: int) -> list[Vec3]:
    """n approximately equidistant unit vectors (Fibonacci sphere lattice)."""
    if n < 1:
        raise ValueError("need at least one direction")
    golden = np.pi * (3.0 - np.sqrt(5.0))
    out = []
    for i in range(n):
        z = 1.0 - 2.0 * (i + 0.5) / n
        r = np.sqrt(max(0.0, 1.0 - z * z))
        phi = golden * i
        out.append(vec3(r * np.cos(phi), r * np.sin(phi), z))
    return out
