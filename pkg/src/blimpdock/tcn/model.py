"""Gust-response forecaster: four causal residual blocks, checkpoint I/O."""

import json
import struct

import numpy as np

from .layers import ResidualBlock

N_FEATURES = 6
SEQ_LEN = 98
# (dilation, kernel, in, out) per block
ARCH = ((1, 1, N_FEATURES, 32), (2, 9, 32, 32), (4, 9, 32, 32), (8, 9, 32, N_FEATURES))

CKPT_MAGIC = b"BDTCN001"


class Normalizer:
    """Per-feature min-max scaling to [0, 1].

    Degenerate features (max == min) map to the constant 0.5 and are
    flagged so denormalize can restore the original constant.
    """

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        self.degenerate = self.hi <= self.lo
        self.span = np.where(self.degenerate, 1.0, self.hi - self.lo)

    @classmethod
    def fit(cls, frames: np.ndarray) -> "Normalizer":
        return cls(frames.min(axis=0), frames.max(axis=0))

    def normalize(self, frames: np.ndarray) -> np.ndarray:
        out = (frames - self.lo) / self.span
        if self.degenerate.any():
            out = np.where(self.degenerate, 0.5, out)
        return out

    def denormalize(self, frames: np.ndarray) -> np.ndarray:
        out = frames * self.span + self.lo
        if self.degenerate.any():
            out = np.where(self.degenerate, self.lo, out)
        return out


class TcnModel:
    def __init__(self, normalizer: Normalizer | None = None):
        self.blocks = [ResidualBlock(ci, co, k, d) for d, k, ci, co in ARCH]
        self.normalizer = normalizer

    # -- parameter plumbing ------------------------------------------------
    def named_params(self):
        out = []
        for i, blk in enumerate(self.blocks):
            for lname, layer in blk.layers():
                for pname, arr in layer.params():
                    out.append((f"block{i}.{lname}.{pname}", arr))
        return out

    def param_arrays(self):
        return [arr for _, arr in self.named_params()]

    def grad_arrays(self):
        out = []
        for blk in self.blocks:
            for _, layer in blk.layers():
                out.extend(layer.grads())
        return out

    def zero_grads(self):
        for g in self.grad_arrays():
            g[...] = 0.0

    def set_params(self, arrays):
        for dst, src in zip(self.param_arrays(), arrays):
            dst[...] = src

    def snapshot(self):
        return [arr.copy() for arr in self.param_arrays()]

    # -- passes --------------------------------------------------------------
    def forward_batch(self, x: np.ndarray, want_cache: bool = False):
        """x (B, SEQ_LEN, N_FEATURES) normalized -> same-shape output."""
        if x.ndim != 3 or x.shape[1] != SEQ_LEN or x.shape[2] != N_FEATURES:
            raise ValueError(f"expected (B, {SEQ_LEN}, {N_FEATURES}) input, got {x.shape}")
        h = np.ascontiguousarray(x.transpose(0, 2, 1))
        caches = []
        for blk in self.blocks:
            h, cache = blk.forward(h)
            caches.append(cache)
        y = h.transpose(0, 2, 1)
        return (y, caches) if want_cache else y

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Single normalized sequence (SEQ_LEN, N_FEATURES) in and out."""
        if x.shape != (SEQ_LEN, N_FEATURES):
            raise ValueError(f"expected ({SEQ_LEN}, {N_FEATURES}) input, got {x.shape}")
        return self.forward_batch(x[None])[0]

    def backward_batch(self, grad_y: np.ndarray, caches):
        """Accumulate parameter gradients; grad_y matches forward output."""
        g = np.ascontiguousarray(grad_y.transpose(0, 2, 1))
        for blk, cache in zip(reversed(self.blocks), reversed(caches)):
            g = blk.backward(g, cache)
        return g.transpose(0, 2, 1)


def build_model() -> TcnModel:
    return TcnModel()


def init_he_normal(model: TcnModel, seed: int) -> TcnModel:
    """He-normal conv weights, zero biases, unit layer-norm gains."""
    rng = np.random.default_rng(seed)
    for blk in model.blocks:
        for _, layer in blk.layers():
            if hasattr(layer, "w"):
                fan_in = layer.in_channels * layer.kernel
                layer.w[...] = rng.normal(0.0, np.sqrt(2.0 / fan_in), layer.w.shape)
                layer.b[...] = 0.0
            else:
                layer.g[...] = 1.0
                layer.b[...] = 0.0
    return model


# ---------------------------------------------------------------------------
# checkpoint container: magic | u64 header len | JSON header | raw <f8 blobs
# ---------------------------------------------------------------------------

def save_checkpoint(model: TcnModel, path: str, extra: dict | None = None):
    named = model.named_params()
    header = {
        "format": "blimpdock-tcn",
        "version": 1,
        "arch": [list(a) for a in ARCH],
        "params": [[name, list(arr.shape)] for name, arr in named],
        "normalizer": None,
        "extra": extra or {},
    }
    if model.normalizer is not None:
        header["normalizer"] = {
            "lo": model.normalizer.lo.tolist(),
            "hi": model.normalizer.hi.tolist(),
        }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, arr in named:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path: str):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CKPT_MAGIC:
            raise ValueError(f"{path} is not a blimpdock TCN checkpoint")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        model = TcnModel()
        if header["normalizer"] is not None:
            model.normalizer = Normalizer(header["normalizer"]["lo"],
                                          header["normalizer"]["hi"])
        for (name, shape), (have, arr) in zip(header["params"], model.named_params()):
            if name != have or list(arr.shape) != shape:
                raise ValueError(f"checkpoint layout mismatch at {name} vs {have}")
            raw = fh.read(arr.size * 8)
            arr[...] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)
    return model, header["extra"]
