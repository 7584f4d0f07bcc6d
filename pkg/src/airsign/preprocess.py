"""Signature image preprocessing for the verification network.

Pipeline: bilinear resize to a fixed (height, width), invert so the
background maps to 0, divide by 255 so values land in [0, 1].
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .strokes import SignatureImage

# Network input size; tiny preset uses (32, 44) at the same aspect ratio.
TARGET_H = 155
TARGET_W = 220
TINY_H = 32
TINY_W = 44


def resize_bilinear(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with half-pixel-center mapping and edge clamping.

    src = (dst + 0.5) * (in / out) - 0.5, blended from the 4 nearest source
    pixels.  Resizing to the input size is exactly the identity.
    """
    if out_h < 1 or out_w < 1:
        raise ValidationError(f"bad output size {out_h}x{out_w}")
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise ValidationError("input must be a non-empty 2-D array")
    in_h, in_w = values.shape

    sy = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    sx = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    fy = sy - y0
    fx = sx - x0
    y0c = np.clip(y0, 0, in_h - 1)
    y1c = np.clip(y0 + 1, 0, in_h - 1)
    x0c = np.clip(x0, 0, in_w - 1)
    x1c = np.clip(x0 + 1, 0, in_w - 1)

    top = values[y0c][:, x0c] * (1 - fx) + values[y0c][:, x1c] * fx
    bot = values[y1c][:, x0c] * (1 - fx) + values[y1c][:, x1c] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def invert_normalize(values: np.ndarray) -> np.ndarray:
    """(255 - v) / 255: background 255 -> 0, ink 0 -> 1."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0 or values.max() > 255):
        raise ValidationError("pixel values must lie in [0, 255]")
    return (255.0 - values) / 255.0


def preprocess(img: SignatureImage, out_h: int = TARGET_H,
               out_w: int = TARGET_W) -> np.ndarray:
    """Resize then invert/normalize; returns (out_h, out_w) floats in [0, 1]."""
    return invert_normalize(resize_bilinear(img.pixels, out_h, out_w))
