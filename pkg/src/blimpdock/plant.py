"""Surrogate blimp/UAV dynamics and the gust-response dataset pipeline.

The blimp model is a per-axis underdamped second-order response of the
velocity deviation e = v - v_nominal to the gust velocity input, with a
linear map from e to roll/pitch/yaw excursions:

    e'' + 2*zeta*omega_n*e' + omega_n**2 * e = gust_gain * omega_n**2 * v_g

The oscillator is advanced with the exact zero-order-hold discretization
(input sampled at the interval start), so the free response decays
exactly like the continuous system.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .gust import (GustEvent, gust_velocity, sample_direction_uniform,
                   sample_directions_equidistant)
from .world import BlimpState, UavState, Vec3, vec3

EULER_CLAMP = 0.5  # rad, attitude excursion limit

# feature order used throughout: velocity then attitude
FEATURE_COLUMNS = ("vx", "vy", "vz", "roll", "pitch", "yaw")


@dataclass
class BlimpPlantParams:
    nominal_velocity: Vec3 = field(default_factory=lambda: vec3(1.0, 0.0, 0.0))
    omega_n: float = 0.35      # rad/s
    zeta: float = 0.25         # underdamped
    gust_gain: float = 0.9
    euler_gain: tuple = (0.05, 0.05, 0.08)  # roll<-e_y, pitch<-e_x, yaw<-e_y
    dt: float = 0.1
    initial_position: Vec3 = field(default_factory=lambda: vec3(0.0, 0.0, 30.0))

    def __post_init__(self):
        if self.omega_n <= 0.0 or self.dt <= 0.0:
            raise ValueError("omega_n and dt must be positive")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError("zeta must be in (0, 1)")

    def zoh_matrices(self):
        """Exact discrete (A_d, B_d) for the (e, e') oscillator state."""
        w, z, dt = self.omega_n, self.zeta, self.dt
        wd = w * np.sqrt(1.0 - z * z)
        ec, es = np.exp(-z * w * dt) * np.cos(wd * dt), np.exp(-z * w * dt) * np.sin(wd * dt)
        ad = np.array([
            [ec + (z * w / wd) * es, es / wd],
            [-(w * w / wd) * es, ec - (z * w / wd) * es],
        ])
        a = np.array([[0.0, 1.0], [-w * w, -2.0 * z * w]])
        b = np.array([0.0, self.gust_gain * w * w])
        bd = np.linalg.solve(a, (ad - np.eye(2)) @ b)
        return ad, bd


def step_blimp(state: BlimpState, internal: np.ndarray, gust: Vec3,
               params: BlimpPlantParams, zoh=None):
    """Advance one dt. internal is the (3, 2) array of (e, e') per axis."""
    ad, bd = zoh if zoh is not None else params.zoh_matrices()
    nxt = internal @ ad.T + np.outer(np.asarray(gust, dtype=np.float64), bd)
    e = nxt[:, 0]
    vel = params.nominal_velocity + e
    pos = state.position + 0.5 * params.dt * (state.velocity + vel)
    g = params.euler_gain
    euler = np.clip(vec3(g[0] * e[1], g[1] * e[0], g[2] * e[1]),
                    -EULER_CLAMP, EULER_CLAMP)
    return BlimpState(pos, vel, euler, state.time + params.dt), nxt


def step_uav(state: UavState, accel: Vec3, dt: float,
             v_min: Vec3, v_max: Vec3) -> UavState:
    """Double-integrator step, exact for constant acceleration; velocity clamped."""
    a = np.asarray(accel, dtype=np.float64)
    pos = state.position + dt * state.velocity + 0.5 * dt * dt * a
    vel = np.clip(state.velocity + dt * a, v_min, v_max)
    return UavState(pos, vel, state.time + dt)


# ---------------------------------------------------------------------------
# episodes
# ---------------------------------------------------------------------------

@dataclass
class EpisodeSpec:
    t0: float          # gust onset [s]
    T_g: float         # gust duration [s]
    t2: float          # episode end [s]
    v_max: float       # peak gust speed [m/s]
    direction: Vec3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.t0 < self.t0 + self.T_g < self.t2:
            raise ValueError("episode phases must satisfy 0 < t0 < t0+T_g < t2")


@dataclass
class Episode:
    spec: EpisodeSpec
    times: np.ndarray      # (T,)
    position: np.ndarray   # (T, 3)
    velocity: np.ndarray   # (T, 3)
    euler: np.ndarray      # (T, 3)
    gust: np.ndarray       # (T, 3)

    def __len__(self):
        return len(self.times)

    def state_at(self, k: int) -> BlimpState:
        return BlimpState(self.position[k].copy(), self.velocity[k].copy(),
                          self.euler[k].copy(), float(self.times[k]))

    def features(self) -> np.ndarray:
        """(T, 6) matrix of velocity + euler, the forecaster's feature layout."""
        return np.hstack([self.velocity, self.euler])


def integrate_positions(velocity: np.ndarray, p0: Vec3, dt: float) -> np.ndarray:
    """Trapezoid cumulative integration; the single source of blimp positions."""
    pos = np.empty_like(velocity)
    pos[0] = p0
    steps = 0.5 * dt * (velocity[1:] + velocity[:-1])
    np.cumsum(steps, axis=0, out=pos[1:])
    pos[1:] += p0
    return pos


def simulate_episode(spec: EpisodeSpec, params: BlimpPlantParams) -> Episode:
    n = int(round(spec.t2 / params.dt)) + 1
    event = GustEvent(spec.t0, spec.T_g, spec.v_max, spec.direction)
    zoh = params.zoh_matrices()
    times = np.arange(n) * params.dt
    velocity = np.empty((n, 3))
    euler = np.empty((n, 3))
    gust = np.empty((n, 3))

    state = BlimpState(params.initial_position.copy(),
                       params.nominal_velocity.copy(), vec3(0, 0, 0), 0.0)
    internal = np.zeros((3, 2))
    velocity[0], euler[0] = state.velocity, state.euler
    gust[0] = gust_velocity(event, 0.0)
    for k in range(1, n):
        g = gust_velocity(event, times[k - 1])  # held over the step
        state, internal = step_blimp(state, internal, g, params, zoh)
        velocity[k], euler[k] = state.velocity, state.euler
        gust[k] = gust_velocity(event, times[k])

    position = integrate_positions(velocity, params.initial_position, params.dt)
    return Episode(spec, times, position, velocity, euler, gust)


# ---------------------------------------------------------------------------
# dataset generation and persistence
# ---------------------------------------------------------------------------

@dataclass
class DatasetParams:
    # per-level training episode counts, desk-scale
    training_counts: dict = field(default_factory=lambda: {1: 60, 2: 20, 3: 10, 4: 60})
    evaluation_count: int = 10
    evaluation_v_max: float = 4.0
    t0: float = 10.0
    T_g: float = 4.0
    t2_training: float = 46.0
    t2_evaluation: float = 196.0


def _fmt(x) -> str:
    return repr(float(x))


def save_episode(ep: Episode, path: str):
    s = ep.spec
    lines = [
        "# blimpdock episode v1",
        f"t0 = {_fmt(s.t0)}", f"T_g = {_fmt(s.T_g)}", f"t2 = {_fmt(s.t2)}",
        f"v_max = {_fmt(s.v_max)}",
        f"dir_x = {_fmt(s.direction[0])}", f"dir_y = {_fmt(s.direction[1])}",
        f"dir_z = {_fmt(s.direction[2])}",
        f"seed = {int(s.seed)}",
        f"p0_x = {_fmt(ep.position[0, 0])}", f"p0_y = {_fmt(ep.position[0, 1])}",
        f"p0_z = {_fmt(ep.position[0, 2])}",
        f"dt = {_fmt(ep.times[1] - ep.times[0])}",
        "t," + ",".join(FEATURE_COLUMNS) + ",gx,gy,gz",
    ]
    for k in range(len(ep)):
        row = [ep.times[k], *ep.velocity[k], *ep.euler[k], *ep.gust[k]]
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_episode(path: str) -> Episode:
    head = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, val = (p.strip() for p in line.split("=", 1))
                head[key] = val
            elif line[0].isalpha() or line.startswith("t,"):
                continue  # column header
            else:
                rows.append([float(x) for x in line.split(",")])
    data = np.array(rows)
    spec = EpisodeSpec(float(head["t0"]), float(head["T_g"]), float(head["t2"]),
                       float(head["v_max"]),
                       vec3(float(head["dir_x"]), float(head["dir_y"]),
                            float(head["dir_z"])),
                       int(head["seed"]))
    p0 = vec3(float(head["p0_x"]), float(head["p0_y"]), float(head["p0_z"]))
    dt = float(head["dt"])
    velocity, euler, gust = data[:, 1:4], data[:, 4:7], data[:, 7:10]
    position = integrate_positions(velocity, p0, dt)
    return Episode(spec, data[:, 0], position, velocity, euler, gust)


def _episode_seeds(master_seed: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(master_seed)
    return rng.integers(0, 2**63 - 1, size=n, dtype=np.int64)


def training_specs(ds: DatasetParams, seed: int) -> list[EpisodeSpec]:
    counts = sorted(ds.training_counts.items())
    total = sum(c for _, c in counts)
    seeds = _episode_seeds(seed, total)
    specs = []
    i = 0
    for level, count in counts:
        for _ in range(count):
            rng = np.random.default_rng(int(seeds[i]))
            direction = sample_direction_uniform(rng)
            specs.append(EpisodeSpec(ds.t0, ds.T_g, ds.t2_training,
                                     float(level), direction, int(seeds[i])))
            i += 1
    return specs


def evaluation_specs(ds: DatasetParams, seed: int) -> list[EpisodeSpec]:
    seeds = _episode_seeds(seed + 1, ds.evaluation_count)
    dirs = sample_directions_equidistant(ds.evaluation_count)
    return [EpisodeSpec(ds.t0, ds.T_g, ds.t2_evaluation, ds.evaluation_v_max,
                        dirs[i], int(seeds[i]))
            for i in range(ds.evaluation_count)]


def gust_free_specs(ds: DatasetParams, count: int, seed: int) -> list[EpisodeSpec]:
    """Calm-air episodes (v_max = 0) for false-positive checks."""
    seeds = _episode_seeds(seed + 2, count)
    return [EpisodeSpec(ds.t0, ds.T_g, ds.t2_evaluation, 0.0,
                        vec3(1.0, 0.0, 0.0), int(seeds[i]))
            for i in range(count)]


def generate_dataset(kind: str, params: BlimpPlantParams, ds: DatasetParams,
                     seed: int, out_dir: str) -> list[str]:
    """Simulate and persist one file per episode plus a manifest; returns paths."""
    if kind == "training":
        specs = training_specs(ds, seed)
    elif kind == "evaluation":
        specs = evaluation_specs(ds, seed)
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    manifest = ["filename,kind,v_max,seed,t0,T_g,t2,dir_x,dir_y,dir_z"]
    for i, spec in enumerate(specs):
        ep = simulate_episode(spec, params)
        name = f"ep_{kind}_{i:04d}.csv"
        save_episode(ep, os.path.join(out_dir, name))
        paths.append(os.path.join(out_dir, name))
        manifest.append(",".join([
            name, kind, _fmt(spec.v_max), str(int(spec.seed)), _fmt(spec.t0),
            _fmt(spec.T_g), _fmt(spec.t2), _fmt(spec.direction[0]),
            _fmt(spec.direction[1]), _fmt(spec.direction[2]),
        ]))
    with open(os.path.join(out_dir, f"manifest_{kind}.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(manifest) + "\n")
    return paths


def load_manifest(out_dir: str, kind: str) -> list[str]:
    path = os.path.join(out_dir, f"manifest_{kind}.csv")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no {kind} manifest in {out_dir}")
    names = []
    with open(path) as fh:
        next(fh)
        for line in fh:
            if line.strip():
                names.append(os.path.join(out_dir, line.split(",")[0]))
    return names
