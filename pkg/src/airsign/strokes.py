"""Posture-gated stroke capture, smoothing, and deterministic rasterization.

Active samples are smoothed with a causal exponential moving average and
appended to the open stroke; Stop/Neutral lifts the pen, Erase wipes the
canvas.  Rasterization connects consecutive points of each stroke with an
integer-stepped line (no anti-aliasing) stamped by a filled disc, so fast
motion never leaves gaps and identical input always yields identical ink.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import EmptySignatureError, ValidationError
from .landmarks import PointerSample, Posture

BACKGROUND = 255
INK = 0


class SessionEvent(enum.Enum):
    POINT_ADDED = "point_added"
    STROKE_CLOSED = "stroke_closed"
    CLEARED = "cleared"
    NONE = "none"


@dataclass(frozen=True)
class SmoothingConfig:
    alpha: float = 0.4  # EMA coefficient; 1.0 disables smoothing
    brush_radius_px: int = 2
    crop_margin_px: int = 10

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValidationError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.brush_radius_px < 0 or self.crop_margin_px < 0:
            raise ValidationError("brush radius and crop margin must be >= 0")


@dataclass
class Stroke:
    """Ordered pen-down trajectory: (x_px, y_px, t_ms) with t non-decreasing."""

    points: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class SignatureImage:
    """8-bit grayscale raster, 0 = ink on 255 = background."""

    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise ValidationError("pixels must be a 2-D uint8 array")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValidationError("image dimensions must be >= 1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="L").save(buf, format="PNG")
        return buf.getvalue()

    def save_png(self, path) -> None:
        Image.fromarray(self.pixels, mode="L").save(path, format="PNG")

    @staticmethod
    def from_png_bytes(data: bytes) -> "SignatureImage":
        try:
            img = Image.open(io.BytesIO(data))
            img.load()
        except Exception as exc:
            raise ValidationError(f"undecodable image: {exc}") from exc
        return SignatureImage(pixels=_to_grayscale(img))

    @staticmethod
    def load_png(path) -> "SignatureImage":
        try:
            img = Image.open(path)
            img.load()
        except Exception as exc:
            raise ValidationError(f"cannot read image {path}: {exc}") from exc
        return SignatureImage(pixels=_to_grayscale(img))


def _to_grayscale(img: Image.Image) -> np.ndarray:
    # ITU-R 601 luminance for color input; dataset corpora are already gray.
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img, dtype=np.uint8)


class StrokeSession:
    """Accumulates smoothed strokes on a fixed-size canvas.

    One session per client, confined to one logical thread.
    """

    def __init__(self, canvas_w: int = 640, canvas_h: int = 480,
                 config: SmoothingConfig | None = None):
        if canvas_w < 1 or canvas_h < 1:
            raise ValidationError(f"bad canvas {canvas_w}x{canvas_h}")
        self.canvas_w = canvas_w
        self.canvas_h = canvas_h
        self.config = config or SmoothingConfig()
        self.strokes: list[Stroke] = []
        self.ema_state: tuple[float, float] | None = None
        self.posture: Posture = Posture.NEUTRAL
        self._open_stroke: Stroke | None = None

    def feed(self, posture: Posture, sample: PointerSample) -> SessionEvent:
        """Advance the session by one posture-gated pointer sample."""
        self.posture = posture
        if posture == Posture.ACTIVE:
            return self._add_point(sample)
        if posture == Posture.ERASE:
            return self._clear()
        return self._pen_up()  # STOP and NEUTRAL

    def _add_point(self, sample: PointerSample) -> SessionEvent:
        x = min(max(sample.x_px, 0.0), float(self.canvas_w))
        y = min(max(sample.y_px, 0.0), float(self.canvas_h))
        if self.ema_state is None:
            sx, sy = x, y  # first sample after pen-up is taken raw
        else:
            a = self.config.alpha
            px, py = self.ema_state
            sx = a * x + (1.0 - a) * px
            sy = a * y + (1.0 - a) * py
        self.ema_state = (sx, sy)
        if self._open_stroke is None:
            self._open_stroke = Stroke()
            self.strokes.append(self._open_stroke)
        self._open_stroke.points.append((sx, sy, sample.t_ms))
        return SessionEvent.POINT_ADDED

    def _pen_up(self) -> SessionEvent:
        self.ema_state = None
        if self._open_stroke is not None:
            self._open_stroke = None
            return SessionEvent.STROKE_CLOSED
        return SessionEvent.NONE

    def _clear(self) -> SessionEvent:
        had_ink = bool(self.strokes) or self._open_stroke is not None
        self.strokes = []
        self._open_stroke = None
        self.ema_state = None
        return SessionEvent.CLEARED if had_ink else SessionEvent.NONE

    def last_point(self) -> tuple[float, float] | None:
        return self.ema_state

    def rasterize(self) -> SignatureImage:
        return rasterize(self)


def line_pixels(x0: int, y0: int, x1: int, y1: int) -> list:
    """Integer Bresenham line from (x0, y0) to (x1, y1), inclusive.

    Error-accumulator form; ties step the minor axis, matching
    round-half-away-from-zero of the ideal line.
    """
    pts = []
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        pts.append((x, y))
        if x == x1 and y == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def _disc_offsets(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    du, dv = np.meshgrid(span, span, indexing="ij")
    mask = du * du + dv * dv <= radius * radius
    return np.stack([du[mask], dv[mask]], axis=1)


def rasterize(session: StrokeSession) -> SignatureImage:
    """Draws every stroke onto a fresh canvas; pure given a session snapshot.

    Segments never cross stroke boundaries.  Output contains only 0 and 255.
    """
    drawable = [s for s in session.strokes if len(s) >= 1]
    if not drawable:
        raise EmptySignatureError("no strokes to rasterize")
    h, w = session.canvas_h, session.canvas_w
    img = np.full((h, w), BACKGROUND, dtype=np.uint8)
    offsets = _disc_offsets(session.config.brush_radius_px)
    for stroke in drawable:
        ints = [
            (min(max(int(round(x)), 0), w - 1), min(max(int(round(y)), 0), h - 1))
            for x, y, _ in stroke.points
        ]
        pix = []
        if len(ints) == 1:
            pix.append(ints[0])
        for (ax, ay), (bx, by) in zip(ints, ints[1:]):
            pix.extend(line_pixels(ax, ay, bx, by))
        pix = np.asarray(pix, dtype=np.int64)
        stamped = pix[:, None, :] + offsets[None, :, :]
        xs = stamped[:, :, 0].ravel()
        ys = stamped[:, :, 1].ravel()
        ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
        img[ys[ok], xs[ok]] = INK
    return SignatureImage(pixels=img)


def export_signature(img: SignatureImage, margin: int = 10) -> SignatureImage:
    """Crops to the ink bounding box expanded by `margin`, clamped to bounds."""
    if margin < 0:
        raise ValidationError(f"margin must be >= 0, got {margin}")
    ys, xs = np.nonzero(img.pixels != BACKGROUND)
    if ys.size == 0:
        raise EmptySignatureError("image contains no ink")
    y0 = max(int(ys.min()) - margin, 0)
    y1 = min(int(ys.max()) + margin, img.height - 1)
    x0 = max(int(xs.min()) - margin, 0)
    x1 = min(int(xs.max()) + margin, img.width - 1)
    return SignatureImage(pixels=img.pixels[y0:y1 + 1, x0:x1 + 1].copy())
