"""Recursive multi-window forecasting with a kink-free fade-in.

One forward pass maps the latest observed window to the forecast of the
next SEQ_LEN frames. Longer horizons chain passes, re-feeding each faded
segment. The fade blends the first n_fade frames of every new segment
from the held final value of the previous segment with a raised-cosine
weight, so each joint matches in value and starts with zero slope.
"""

import numpy as np

from .model import N_FEATURES, SEQ_LEN, TcnModel

N_FADE = 10


def fade_weights(n_fade: int = N_FADE) -> np.ndarray:
    i = np.arange(n_fade)
    return 0.5 * (1.0 - np.cos(np.pi * i / n_fade))


def _fade_segment(segment: np.ndarray, held: np.ndarray, n_fade: int):
    """In-place blend of segment[:n_fade] toward the held boundary values."""
    k = min(n_fade, segment.shape[-2])
    w = fade_weights(n_fade)[:k]
    if segment.ndim == 2:
        segment[:k] = (1.0 - w)[:, None] * held[None, :] + w[:, None] * segment[:k]
    else:
        segment[:, :k] = ((1.0 - w)[None, :, None] * held[:, None, :]
                          + w[None, :, None] * segment[:, :k])
    return segment


def predict_recursive(model: TcnModel, seed_sequence: np.ndarray,
                      horizon_steps: int, n_fade: int = N_FADE) -> np.ndarray:
    """Forecast horizon_steps frames (raw units) after the seed window.

    seed_sequence: the latest (SEQ_LEN, 6) observed frames, raw units.
    Returned frame j is the prediction for j+1 steps past the seed's end.
    """
    if horizon_steps < 1:
        raise ValueError("horizon must be at least one step")
    if seed_sequence.shape != (SEQ_LEN, N_FEATURES):
        raise ValueError(f"seed must be ({SEQ_LEN}, {N_FEATURES}), "
                         f"got {seed_sequence.shape}")
    norm = model.normalizer
    window = np.asarray(seed_sequence, dtype=np.float64)
    held = window[-1].copy()
    pieces = []
    produced = 0
    while produced < horizon_steps:
        seg = norm.denormalize(model.forward(norm.normalize(window)))
        _fade_segment(seg, held, n_fade)
        pieces.append(seg)
        produced += SEQ_LEN
        window = seg
        held = seg[-1].copy()
    return np.vstack(pieces)[:horizon_steps]


def forecast_batch(model: TcnModel, seeds: np.ndarray, horizon_steps: int,
                   n_fade: int = N_FADE) -> np.ndarray:
    """Vectorized single-window forecasts, horizon limited to SEQ_LEN.

    seeds (B, SEQ_LEN, 6) raw -> (B, horizon_steps, 6); matches
    predict_recursive row by row.
    """
    if not 1 <= horizon_steps <= SEQ_LEN:
        raise ValueError(f"batch horizon must be in [1, {SEQ_LEN}]")
    norm = model.normalizer
    seg = norm.denormalize(model.forward_batch(norm.normalize(seeds)))
    _fade_segment(seg, seeds[:, -1, :], n_fade)
    return seg[:, :horizon_steps]
