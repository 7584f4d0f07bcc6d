"""Sequential layer stack and the two embedding-network presets.

The full-size preset mirrors an AlexNet-style stack on 155x220 inputs and
ends in a 128-wide embedding; the tiny preset (32x44 inputs, 16-wide
embedding) trains in seconds on a CPU and backs the desk-scale tests.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, ValidationError
from .layers import LRN, Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2D, ReLU


class Sequential:
    """Layer pipeline with explicit caches so one parameter set can serve
    several concurrent forward passes."""

    def __init__(self, layers: list, input_shape: tuple, dtype=np.float64):
        self.layers = layers
        self.input_shape = tuple(input_shape)  # (C, H, W)
        self.dtype = dtype
        # Validates layer compatibility eagerly.
        self.output_shape = self.shapes()[-1][1]

    @property
    def params(self) -> list:
        return [p for layer in self.layers for p in layer.params]

    def shapes(self) -> list:
        """(layer name, output shape) chain from the configured input."""
        shape = self.input_shape
        out = [("input", shape)]
        for layer in self.layers:
            shape = layer.out_shape(shape)
            out.append((type(layer).__name__, shape))
        return out

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 3:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"expected input {self.input_shape}, got {x.shape[1:]}")
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, train=train, rng=rng)
            caches.append(cache)
        return x, caches

    def backward(self, dout, caches):
        grads = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            dout, g = self.layers[i].backward(dout, caches[i])
            grads[i] = g
        flat = [g for gs in grads for g in gs]
        return dout, flat

    def zero_grads_like(self) -> list:
        return [np.zeros_like(p) for p in self.params]

    def get_params(self) -> list:
        return [p.copy() for p in self.params]

    def set_params(self, values: list) -> None:
        params = self.params
        if len(values) != len(params):
            raise ShapeError("parameter count mismatch")
        for p, v in zip(params, values):
            if p.shape != v.shape:
                raise ShapeError(f"parameter shape {v.shape} != {p.shape}")
            p[...] = v

    def specs(self) -> list:
        return [layer.spec() for layer in self.layers]


def _build_layer(spec: dict, rng, dtype) -> Layer:
    kind = spec["kind"]
    if kind == "conv":
        return Conv2D(spec["in_ch"], spec["out_ch"], spec["kh"], spec["kw"],
                      spec["stride"], rng=rng, dtype=dtype)
    if kind == "maxpool":
        return MaxPool2D(spec["kh"], spec["kw"], spec["stride"])
    if kind == "lrn":
        return LRN(spec["k"], spec["n"], spec["alpha"], spec["beta"])
    if kind == "dropout":
        return Dropout(spec["rate"])
    if kind == "relu":
        return ReLU()
    if kind == "flatten":
        return Flatten()
    if kind == "dense":
        return Dense(spec["in_dim"], spec["out_dim"], rng=rng, dtype=dtype)
    raise ValidationError(f"unknown layer kind {kind!r}")


def build_from_specs(specs: list, input_shape: tuple, seed=None,
                     dtype=np.float64) -> Sequential:
    rng = np.random.default_rng(seed)
    layers = [_build_layer(s, rng, dtype) for s in specs]
    return Sequential(layers, input_shape, dtype=dtype)


# Preset tables: (input (C, H, W), layer specs, dtype).  The full stack:
# conv1 96@11x11 -> relu -> LRN -> pool3x3/2; conv2 256@5x5 -> relu -> LRN
# -> pool -> dropout .3; conv3 384@3x3 -> relu; conv4 256@3x3 -> relu ->
# pool -> dropout .3; dense 1024 -> relu -> dropout .5; dense 128.
_LRN_DEFAULTS = {"k": 2.0, "n": 5, "alpha": 1e-4, "beta": 0.75}


def _full_specs():
    return [
        {"kind": "conv", "in_ch": 1, "out_ch": 96, "kh": 11, "kw": 11, "stride": 1},
        {"kind": "relu"},
        {"kind": "lrn", **_LRN_DEFAULTS},
        {"kind": "maxpool", "kh": 3, "kw": 3, "stride": 2},
        {"kind": "conv", "in_ch": 96, "out_ch": 256, "kh": 5, "kw": 5, "stride": 1},
        {"kind": "relu"},
        {"kind": "lrn", **_LRN_DEFAULTS},
        {"kind": "maxpool", "kh": 3, "kw": 3, "stride": 2},
        {"kind": "dropout", "rate": 0.3},
        {"kind": "conv", "in_ch": 256, "out_ch": 384, "kh": 3, "kw": 3, "stride": 1},
        {"kind": "relu"},
        {"kind": "conv", "in_ch": 384, "out_ch": 256, "kh": 3, "kw": 3, "stride": 1},
        {"kind": "relu"},
        {"kind": "maxpool", "kh": 3, "kw": 3, "stride": 2},
        {"kind": "dropout", "rate": 0.3},
        {"kind": "flatten"},
        {"kind": "dense", "in_dim": 256 * 14 * 22, "out_dim": 1024},
        {"kind": "relu"},
        {"kind": "dropout", "rate": 0.5},
        {"kind": "dense", "in_dim": 1024, "out_dim": 128},
    ]


def _tiny_specs():
    return [
        {"kind": "conv", "in_ch": 1, "out_ch": 8, "kh": 3, "kw": 3, "stride": 1},
        {"kind": "relu"},
        {"kind": "maxpool", "kh": 3, "kw": 3, "stride": 2},
        {"kind": "conv", "in_ch": 8, "out_ch": 16, "kh": 3, "kw": 3, "stride": 1},
        {"kind": "relu"},
        {"kind": "maxpool", "kh": 3, "kw": 3, "stride": 2},
        {"kind": "flatten"},
        {"kind": "dense", "in_dim": 16 * 5 * 8, "out_dim": 64},
        {"kind": "relu"},
        {"kind": "dense", "in_dim": 64, "out_dim": 16},
    ]


PRESETS = {
    # name: (input shape, spec factory, dtype)
    "full": ((1, 155, 220), _full_specs, np.float32),
    "tiny": ((1, 32, 44), _tiny_specs, np.float64),
}


def preset_names() -> list:
    return sorted(PRESETS)


def build_preset(name: str, seed=0) -> Sequential:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; use one of {preset_names()}")
    input_shape, factory, dtype = PRESETS[name]
    return build_from_specs(factory(), input_shape, seed=seed, dtype=dtype)
