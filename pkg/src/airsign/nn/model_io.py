"""Model container file.

Layout: one JSON header line (format version, layer specs, preset, seed,
input shape, optional decision threshold, parameter byte count and CRC-32),
then the raw parameter arrays as little-endian float32 in declaration
order.  The checksum guards truncated or corrupted files.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError
from .net import PRESETS, Sequential, build_from_specs

FORMAT_NAME = "airsign-model"
FORMAT_VERSION = 1


def save_model(path, net: Sequential, preset: str | None = None,
               seed=None, threshold: float | None = None) -> None:
    params = net.params
    payload = b"".join(np.ascontiguousarray(p, dtype="<f4").tobytes()
                       for p in params)
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "preset": preset,
        "seed": seed,
        "input_shape": list(net.input_shape),
        "threshold": threshold,
        "layers": net.specs(),
        "param_shapes": [list(p.shape) for p in params],
        "param_bytes": len(payload),
        "crc32": zlib.crc32(payload),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(payload)


def load_model(path) -> tuple[Sequential, dict]:
    """Returns (net, header).  Raises ModelFormatError on any corruption."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise ModelFormatError("missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"unreadable header: {exc}") from exc
    if header.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"not a model file: format={header.get('format')!r}")
    if header.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported version {header.get('version')!r}")

    payload = raw[nl + 1:]
    if len(payload) != header["param_bytes"]:
        raise ModelFormatError(
            f"truncated parameters: {len(payload)} bytes, "
            f"expected {header['param_bytes']}")
    if zlib.crc32(payload) != header["crc32"]:
        raise ModelFormatError("parameter checksum mismatch")

    preset = header.get("preset")
    dtype = PRESETS[preset][2] if preset in PRESETS else np.float64
    net = build_from_specs(header["layers"], tuple(header["input_shape"]),
                           seed=0, dtype=dtype)
    values = []
    offset = 0
    for shape in header["param_shapes"]:
        count = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
        values.append(arr.reshape(shape).astype(dtype))
        offset += count * 4
    try:
        net.set_params(values)
    except Exception as exc:
        raise ModelFormatError(f"parameter shapes inconsistent: {exc}") from exc
    return net, header
