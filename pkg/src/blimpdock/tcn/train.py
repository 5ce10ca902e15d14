"""Training loop: windowed dataset, Adam with step decay, gradient clipping."""

from dataclasses import dataclass, field

import numpy as np

from .model import N_FEATURES, SEQ_LEN, Normalizer, TcnModel, init_he_normal


@dataclass
class TrainConfig:
    lr: float = 5e-4
    lr_decay_epochs: tuple = (12, 24, 30)
    lr_decay_factor: float = 0.1
    batch_size: int = 64
    grad_clip_norm: float = 0.8
    epochs: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    # window start stride and input->target offset, in frames
    window_stride: int = 3
    target_shift: int = SEQ_LEN
    val_fraction: float = 0.1

    def __post_init__(self):
        if min(self.lr, self.batch_size, self.epochs, self.window_stride,
               self.target_shift) <= 0:
            raise ValueError("training hyperparameters must be positive")


class WindowDataset:
    """(input, target) windows over a set of episode feature tracks.

    The input window [k, k+97] is paired with the track segment starting
    target_shift frames later, so one forward pass maps an observed window
    to the forecast of the following segment.
    """

    def __init__(self, tracks: list[np.ndarray], shift: int, stride: int):
        self.tracks = [np.asarray(t, dtype=np.float64) for t in tracks]
        self.shift = shift
        self.index = []
        for ei, tr in enumerate(self.tracks):
            last_start = len(tr) - SEQ_LEN - shift
            for k in range(0, last_start + 1, stride):
                self.index.append((ei, k))

    def __len__(self):
        return len(self.index)

    def gather(self, ids, normalizer: Normalizer):
        xs = np.empty((len(ids), SEQ_LEN, N_FEATURES))
        ys = np.empty_like(xs)
        for row, i in enumerate(ids):
            ei, k = self.index[i]
            tr = self.tracks[ei]
            xs[row] = tr[k:k + SEQ_LEN]
            ys[row] = tr[k + self.shift:k + self.shift + SEQ_LEN]
        return normalizer.normalize(xs), normalizer.normalize(ys)


def split_episodes(tracks: list[np.ndarray], val_fraction: float):
    """Hold out every (1/val_fraction)-th episode, never individual windows."""
    if val_fraction <= 0.0 or len(tracks) < 2:
        return tracks, []
    every = max(2, int(round(1.0 / val_fraction)))
    train_t = [t for i, t in enumerate(tracks) if i % every != every - 1]
    val_t = [t for i, t in enumerate(tracks) if i % every == every - 1]
    return train_t, val_t


def mse_and_grad(pred, target):
    diff = pred - target
    return float(np.mean(diff * diff)), (2.0 / diff.size) * diff


def _clip_global_norm(grads, max_norm):
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total


def _epoch_loss(model, dataset, ids, batch_size):
    if len(ids) == 0:
        return float("nan")
    total, count = 0.0, 0
    for s in range(0, len(ids), batch_size):
        chunk = ids[s:s + batch_size]
        x, y = dataset.gather(chunk, model.normalizer)
        pred = model.forward_batch(x)
        total += float(np.sum((pred - y) ** 2))
        count += pred.size
    return total / count


def train(tracks: list[np.ndarray], config: TrainConfig,
          model: TcnModel | None = None, val_tracks: list[np.ndarray] | None = None):
    """Fit the forecaster; returns (model-with-best-val-weights, history).

    tracks: per-episode (T, 6) feature arrays in raw units. The min-max
    normalizer is fit on the training split only.
    """
    if not tracks:
        raise ValueError("empty training dataset")
    if val_tracks is None:
        tracks, val_tracks = split_episodes(tracks, config.val_fraction)

    normalizer = Normalizer.fit(np.vstack(tracks))
    if model is None:
        model = init_he_normal(TcnModel(), config.seed)
    model.normalizer = normalizer

    train_ds = WindowDataset(tracks, config.target_shift, config.window_stride)
    val_ds = WindowDataset(val_tracks, config.target_shift, config.window_stride)
    if len(train_ds) == 0:
        raise ValueError("no training windows: tracks shorter than window span")

    params = model.param_arrays()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(config.seed + 1)
    history = {"train_loss": [], "val_loss": [], "lr": []}
    best_val = float("inf")
    best_params = model.snapshot()
    step = 0

    for epoch in range(config.epochs):
        lr = config.lr * config.lr_decay_factor ** sum(
            1 for e in config.lr_decay_epochs if epoch >= e)
        order = rng.permutation(len(train_ds))
        losses = []
        for s in range(0, len(order), config.batch_size):
            ids = order[s:s + config.batch_size]
            x, y = train_ds.gather(ids, normalizer)
            pred, caches = model.forward_batch(x, want_cache=True)
            loss, grad = mse_and_grad(pred, y)
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch} step {step}: {loss}")
            losses.append(loss)
            model.zero_grads()
            model.backward_batch(grad, caches)
            grads = model.grad_arrays()
            _clip_global_norm(grads, config.grad_clip_norm)
            step += 1
            b1c = 1.0 - config.beta1 ** step
            b2c = 1.0 - config.beta2 ** step
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= config.beta1
                mi += (1.0 - config.beta1) * g
                vi *= config.beta2
                vi += (1.0 - config.beta2) * g * g
                p -= lr * (mi / b1c) / (np.sqrt(vi / b2c) + config.adam_eps)

        train_loss = float(np.mean(losses))
        val_loss = _epoch_loss(model, val_ds, np.arange(len(val_ds)),
                               config.batch_size)
        if not np.isnan(val_loss) and val_loss < best_val:
            best_val = val_loss
            best_params = model.snapshot()
        elif np.isnan(val_loss) and train_loss < best_val:
            best_val = train_loss  # no validation split: fall back to train loss
            best_params = model.snapshot()
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        history["lr"].append(lr)

    model.set_params(best_params)
    return model, history
