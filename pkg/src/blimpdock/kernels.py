"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is picked once at import time from the BLIMPDOCK_BACKEND
environment variable ("numba" or "numpy"). Default is numba when the
package is importable, numpy otherwise. Both paths compute identical
quantities; the test suite checks them against each other and the
`bench-kernels` CLI subcommand compares their throughput.

Array layout for the convolution kernels is (batch, channels, time);
weights are (out_channels, in_channels, kernel).
"""

import os

import numpy as np

_requested = os.environ.get("BLIMPDOCK_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"BLIMPDOCK_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

_HAS_NUMBA = False
if _requested != "numpy":
    try:
        from numba import njit, prange

        _HAS_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        _HAS_NUMBA = False

if not _HAS_NUMBA:
    # Fallback decorators so the jitted definitions below still import.
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


def backend() -> str:
    """Name of the active kernel backend."""
    return "numba" if _HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# causal dilated 1-d convolution
# ---------------------------------------------------------------------------

def conv1d_forward_numpy(x, w, b, dilation):
    """Causal dilated conv. x (B,C,T), w (O,C,K), b (O,) -> (B,O,T)."""
    batch, cin, length = x.shape
    cout, _, kernel = w.shape
    pad = (kernel - 1) * dilation
    xp = np.zeros((batch, cin, length + pad), dtype=x.dtype)
    xp[:, :, pad:] = x
    y = np.empty((batch, cout, length), dtype=x.dtype)
    y[:] = b[None, :, None]
    # One GEMM per tap: kernel sizes here are 1 or 9.
    for j in range(kernel):
        seg = xp[:, :, j * dilation : j * dilation + length]
        y += np.einsum("oc,bct->bot", w[:, :, j], seg, optimize=True)
    return y


def conv1d_backward_numpy(x, w, grad_y, dilation):
    """Gradients of conv1d_forward wrt input, weights and bias."""
    batch, cin, length = x.shape
    cout, _, kernel = w.shape
    pad = (kernel - 1) * dilation
    xp = np.zeros((batch, cin, length + pad), dtype=x.dtype)
    xp[:, :, pad:] = x
    grad_xp = np.zeros_like(xp)
    grad_w = np.empty_like(w)
    for j in range(kernel):
        seg = xp[:, :, j * dilation : j * dilation + length]
        grad_w[:, :, j] = np.einsum("bot,bct->oc", grad_y, seg, optimize=True)
        grad_xp[:, :, j * dilation : j * dilation + length] += np.einsum(
            "oc,bot->bct", w[:, :, j], grad_y, optimize=True
        )
    grad_b = grad_y.sum(axis=(0, 2))
    return grad_xp[:, :, pad:], grad_w, grad_b


@njit(cache=True, parallel=True)
def _conv1d_forward_numba(x, w, b, dilation):  # pragma: no cover - jitted
    batch, cin, length = x.shape
    cout, _, kernel = w.shape
    y = np.empty((batch, cout, length), dtype=x.dtype)
    for bi in prange(batch):
        for o in range(cout):
            for t in range(length):
                acc = b[o]
                for j in range(kernel):
                    ti = t - (kernel - 1 - j) * dilation
                    if ti >= 0:
                        for c in range(cin):
                            acc += w[o, c, j] * x[bi, c, ti]
                y[bi, o, t] = acc
    return y


@njit(cache=True, parallel=True)
def _conv1d_grad_x_numba(w, grad_y, cin, dilation):  # pragma: no cover - jitted
    batch, cout, length = grad_y.shape
    kernel = w.shape[2]
    grad_x = np.zeros((batch, cin, length), dtype=grad_y.dtype)
    for bi in prange(batch):
        for c in range(cin):
            for t in range(length):
                acc = 0.0
                for j in range(kernel):
                    to = t + (kernel - 1 - j) * dilation
                    if to < length:
                        for o in range(cout):
                            acc += w[o, c, j] * grad_y[bi, o, to]
                grad_x[bi, c, t] = acc
    return grad_x


@njit(cache=True, parallel=True)
def _conv1d_grad_w_numba(x, grad_y, kernel, dilation):  # pragma: no cover - jitted
    batch, cin, length = x.shape
    cout = grad_y.shape[1]
    grad_w = np.zeros((cout, cin, kernel), dtype=x.dtype)
    for o in prange(cout):
        for c in range(cin):
            for j in range(kernel):
                acc = 0.0
                shift = (kernel - 1 - j) * dilation
                for bi in range(batch):
                    for t in range(shift, length):
                        acc += grad_y[bi, o, t] * x[bi, c, t - shift]
                grad_w[o, c, j] = acc
    return grad_w


def conv1d_forward(x, w, b, dilation):
    if _HAS_NUMBA:
        return _conv1d_forward_numba(x, w, b, int(dilation))
    return conv1d_forward_numpy(x, w, b, dilation)


def conv1d_backward(x, w, grad_y, dilation):
    if _HAS_NUMBA:
        grad_x = _conv1d_grad_x_numba(w, grad_y, x.shape[1], int(dilation))
        grad_w = _conv1d_grad_w_numba(x, grad_y, w.shape[2], int(dilation))
        grad_b = grad_y.sum(axis=(0, 2))
        return grad_x, grad_w, grad_b
    return conv1d_backward_numpy(x, w, grad_y, dilation)


# ---------------------------------------------------------------------------
# capsule + box distance field (no-fly-zone geometry)
# ---------------------------------------------------------------------------

def zone_distance_numpy(points, half_len, radius, box_center_z, box_half):
    """Distance/closest-point/normal to a capsule-box union, vectorized.

    points: (N,3) body-frame coordinates. Capsule axis spans
    [-half_len, half_len] along x with the given radius; the gondola box
    is centered at (0, 0, box_center_z) with half extents box_half.
    Returns (distance, closest, normal, inside); distance is 0 inside,
    normal points toward the nearest exit there.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]

    # --- capsule ---
    t = np.clip(pts[:, 0], -half_len, half_len)
    core = np.zeros_like(pts)
    core[:, 0] = t
    rel = pts - core
    rnorm = np.linalg.norm(rel, axis=1)
    d_cap = rnorm - radius
    n_cap = np.where(rnorm[:, None] > 1e-12, rel / np.maximum(rnorm, 1e-12)[:, None],
                     np.array([0.0, 0.0, 1.0]))
    c_cap = core + radius * n_cap

    # --- box ---
    center = np.array([0.0, 0.0, box_center_z])
    local = pts - center
    q = np.abs(local) - box_half
    outside = np.maximum(q, 0.0)
    d_out = np.linalg.norm(outside, axis=1)
    d_in = np.max(q, axis=1)  # negative inside
    d_box = np.where(d_in > 0.0, d_out, d_in)
    c_box = center + np.clip(local, -box_half, box_half)
    inside_box = d_in <= 0.0
    n_box = np.zeros((n, 3))
    far = d_out > 1e-12
    n_box[far] = (pts[far] - c_box[far]) / d_out[far, None]
    # inside (or on a face): exit along the least-penetrated axis
    ax = np.argmax(q, axis=1)
    rows = ~far
    n_face = np.zeros((n, 3))
    n_face[np.arange(n), ax] = np.where(local[np.arange(n), ax] >= 0.0, 1.0, -1.0)
    n_box[rows] = n_face[rows]
    c_face = c_box.copy()
    idx = np.where(rows)[0]
    for i in idx:
        a = ax[i]
        c_face[i, a] = center[a] + n_face[i, a] * box_half[a]
    c_box = np.where(rows[:, None], c_face, c_box)

    # --- union ---
    inside_cap = d_cap <= 0.0
    inside = inside_cap | inside_box
    # outside: nearer primitive; inside: exit through the containing one
    pick_cap = np.where(
        inside,
        inside_cap & (~inside_box | (np.abs(d_cap) <= np.abs(d_box))),
        d_cap <= d_box,
    )
    dist = np.where(pick_cap, d_cap, d_box)
    normal = np.where(pick_cap[:, None], n_cap, n_box)
    closest = np.where(pick_cap[:, None], c_cap, c_box)
    dist = np.where(inside, 0.0, dist)
    return dist, closest, normal, inside


@njit(cache=True, parallel=True)
def _zone_distance_numba(pts, half_len, radius, box_center_z, box_half):  # pragma: no cover
    n = pts.shape[0]
    dist = np.empty(n)
    closest = np.empty((n, 3))
    normal = np.empty((n, 3))
    inside = np.zeros(n, dtype=np.bool_)
    for i in prange(n):
        px, py, pz = pts[i, 0], pts[i, 1], pts[i, 2]
        # capsule
        t = px
        if t < -half_len:
            t = -half_len
        elif t > half_len:
            t = half_len
        rx, ry, rz = px - t, py, pz
        rn = np.sqrt(rx * rx + ry * ry + rz * rz)
        if rn > 1e-12:
            ncx, ncy, ncz = rx / rn, ry / rn, rz / rn
        else:
            ncx, ncy, ncz = 0.0, 0.0, 1.0
        d_cap = rn - radius
        ccx, ccy, ccz = t + radius * ncx, radius * ncy, radius * ncz
        # box
        lx, ly, lz = px, py, pz - box_center_z
        qx, qy, qz = abs(lx) - box_half[0], abs(ly) - box_half[1], abs(lz) - box_half[2]
        ox = qx if qx > 0.0 else 0.0
        oy = qy if qy > 0.0 else 0.0
        oz = qz if qz > 0.0 else 0.0
        d_out = np.sqrt(ox * ox + oy * oy + oz * oz)
        d_in = max(qx, max(qy, qz))
        inside_box = d_in <= 0.0
        d_box = d_out if d_in > 0.0 else d_in
        bx = lx if abs(lx) <= box_half[0] else (box_half[0] if lx > 0 else -box_half[0])
        by = ly if abs(ly) <= box_half[1] else (box_half[1] if ly > 0 else -box_half[1])
        bz = lz if abs(lz) <= box_half[2] else (box_half[2] if lz > 0 else -box_half[2])
        if d_out > 1e-12:
            nbx, nby, nbz = (px - bx) / d_out, (py - by) / d_out, (pz - (bz + box_center_z)) / d_out
        else:
            nbx, nby, nbz = 0.0, 0.0, 0.0
            if qx >= qy and qx >= qz:
                nbx = 1.0 if lx >= 0.0 else -1.0
                bx = nbx * box_half[0]
            elif qy >= qz:
                nby = 1.0 if ly >= 0.0 else -1.0
                by = nby * box_half[1]
            else:
                nbz = 1.0 if lz >= 0.0 else -1.0
                bz = nbz * box_half[2]
        cbx, cby, cbz = bx, by, bz + box_center_z
        # union
        inside_cap = d_cap <= 0.0
        ins = inside_cap or inside_box
        if ins:
            pick_cap = inside_cap and ((not inside_box) or abs(d_cap) <= abs(d_box))
        else:
            pick_cap = d_cap <= d_box
        if pick_cap:
            d, cx, cy, cz, nx, ny, nz = d_cap, ccx, ccy, ccz, ncx, ncy, ncz
        else:
            d, cx, cy, cz, nx, ny, nz = d_box, cbx, cby, cbz, nbx, nby, nbz
        if ins:
            d = 0.0
        dist[i] = d
        closest[i, 0], closest[i, 1], closest[i, 2] = cx, cy, cz
        normal[i, 0], normal[i, 1], normal[i, 2] = nx, ny, nz
        inside[i] = ins
    return dist, closest, normal, inside


def zone_distance(points, half_len, radius, box_center_z, box_half):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if _HAS_NUMBA:
        return _zone_distance_numba(pts, float(half_len), float(radius),
                                    float(box_center_z),
                                    np.ascontiguousarray(box_half, dtype=np.float64))
    return zone_distance_numpy(pts, half_len, radius, box_center_z,
                               np.asarray(box_half, dtype=np.float64))
