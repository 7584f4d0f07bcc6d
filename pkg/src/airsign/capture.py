"""End-to-end frame pipeline: landmarks -> posture -> pointer -> strokes.

One CaptureSession per client.  The canvas adopts the resolution of the
first frame; frames whose timestamp goes backwards are dropped with a
warning event rather than corrupting stroke order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptySignatureError
from .landmarks import (
    LandmarkFrame,
    PointerSample,
    Posture,
    PostureDebouncer,
    classify_posture,
    detect_fingers_up,
    pointer_of,
)
from .strokes import SignatureImage, SmoothingConfig, StrokeSession, \
    export_signature, rasterize

FRAME_DROPPED = "frame_dropped"


@dataclass(frozen=True)
class FrameResult:
    posture: Posture
    event: str  # SessionEvent value or "frame_dropped"
    point: tuple | None  # current smoothed point, if any


class CaptureSession:
    def __init__(self, debounce_n: int = 3,
                 smoothing: SmoothingConfig | None = None):
        self.smoothing = smoothing or SmoothingConfig()
        self.debouncer = PostureDebouncer(n_frames=debounce_n)
        self.session: StrokeSession | None = None
        self.last_t_ms: int | None = None

    def process_frame(self, frame: LandmarkFrame) -> FrameResult:
        if self.last_t_ms is not None and frame.t_ms < self.last_t_ms:
            return FrameResult(self.debouncer.emitted, FRAME_DROPPED,
                               self._point())
        self.last_t_ms = frame.t_ms
        if self.session is None:
            self.session = StrokeSession(frame.width_px, frame.height_px,
                                         self.smoothing)
        posture = classify_posture(detect_fingers_up(frame), self.debouncer)
        event = self.session.feed(posture, pointer_of(frame))
        return FrameResult(posture, event.value, self._point())

    def _point(self):
        if self.session is None:
            return None
        return self.session.last_point()

    def clear(self) -> None:
        if self.session is not None:
            self.session.feed(Posture.ERASE,
                              PointerSample(0.0, 0.0, self.last_t_ms or 0))

    def finish(self) -> SignatureImage:
        """Rasterize and crop the captured signature; raises
        EmptySignatureError when nothing was drawn."""
        if self.session is None:
            raise EmptySignatureError("no frames received")
        img = rasterize(self.session)
        return export_signature(img, self.smoothing.crop_margin_px)

    def reset(self) -> None:
        self.session = None
        self.debouncer.reset()
        self.last_t_ms = None


def replay_trace(frames, debounce_n: int = 3,
                 smoothing: SmoothingConfig | None = None) -> SignatureImage:
    """Feed a frame iterable through a fresh session and export the PNG
    image; deterministic for identical input."""
    cap = CaptureSession(debounce_n=debounce_n, smoothing=smoothing)
    for frame in frames:
        cap.process_frame(frame)
    return cap.finish()
