from .layers import (
    LRN,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2D,
    ReLU,
)
from .net import Sequential, build_from_specs, build_preset, preset_names
from .optim import OptimizerConfig, RMSprop
from .model_io import load_model, save_model

__all__ = [
    "Layer", "Conv2D", "MaxPool2D", "LRN", "Dropout", "Dense", "ReLU",
    "Flatten", "Sequential", "build_from_specs", "build_preset",
    "preset_names", "OptimizerConfig", "RMSprop", "save_model", "load_model",
]
