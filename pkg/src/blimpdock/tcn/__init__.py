from .layers import ConvLayer, LayerNorm, ResidualBlock
from .model import (TcnModel, Normalizer, build_model, init_he_normal,
                    save_checkpoint, load_checkpoint)
from .train import TrainConfig, WindowDataset, train
from .forecast import predict_recursive, forecast_batch

__all__ = [
    "ConvLayer", "LayerNorm", "ResidualBlock", "TcnModel", "Normalizer",
    "build_model", "init_he_normal", "save_checkpoint", "load_checkpoint",
    "TrainConfig", "WindowDataset", "train", "predict_recursive",
    "forecast_batch",
]
