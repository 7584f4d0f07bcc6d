"""Hand-landmark interpretation: finger states, postures, pointer position.

A landmark frame carries 21 normalized hand keypoints (wrist, then four
joints per finger).  Finger "up" detection compares each fingertip's y
against the corresponding PIP joint; the three drawing postures are fixed
subsets of raised fingers, debounced over consecutive frames.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ValidationError

NUM_LANDMARKS = 21

# Landmark indices of fingertips and PIP joints (thumb excluded: its "up"
# test would need handedness-dependent x-comparisons).
FINGER_TIPS = {"index": 8, "middle": 12, "ring": 16, "pinky": 20}
FINGER_PIPS = {"index": 6, "middle": 10, "ring": 14, "pinky": 18}

POINTER_LANDMARK = 8  # index fingertip


class Posture(enum.Enum):
    ACTIVE = "active"
    STOP = "stop"
    ERASE = "erase"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class LandmarkFrame:
    """One timestamped detection of 21 normalized 3D hand landmarks."""

    t_ms: int
    points: tuple  # 21 triples (x, y, z); x, y in [0, 1], y grows downward
    width_px: int
    height_px: int

    def __post_init__(self):
        if self.t_ms < 0:
            raise ValidationError(f"negative timestamp {self.t_ms}")
        if self.width_px < 1 or self.height_px < 1:
            raise ValidationError(
                f"invalid resolution {self.width_px}x{self.height_px}"
            )
        if len(self.points) != NUM_LANDMARKS:
            raise ValidationError(
                f"expected {NUM_LANDMARKS} landmarks, got {len(self.points)}"
            )
        for i, p in enumerate(self.points):
            if len(p) != 3:
                raise ValidationError(f"landmark {i} is not an (x, y, z) triple")
            x, y, _ = p
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValidationError(
                    f"landmark {i} outside [0,1]: ({x}, {y})"
                )


@dataclass(frozen=True)
class FingerStates:
    """Set of raised fingers among index/middle/ring/pinky."""

    up: frozenset

    def __post_init__(self):
        unknown = self.up - FINGER_TIPS.keys()
        if unknown:
            raise ValidationError(f"unknown fingers {sorted(unknown)}")


@dataclass(frozen=True)
class PointerSample:
    """Index-fingertip position in pixels, with the frame timestamp."""

    x_px: float
    y_px: float
    t_ms: int


def detect_fingers_up(frame: LandmarkFrame) -> FingerStates:
    """A finger is up iff its tip is strictly above its PIP joint.

    y grows downward, so "above" means tip.y < pip.y; equality counts as
    down so a resting hand never draws.  Only y is consulted.
    """
    up = frozenset(
        name
        for name, tip in FINGER_TIPS.items()
        if frame.points[tip][1] < frame.points[FINGER_PIPS[name]][1]
    )
    return FingerStates(up=up)


def raw_posture(states: FingerStates) -> Posture:
    """Map a finger-state set to its raw (undebounced) posture."""
    if states.up == frozenset({"index"}):
        return Posture.ACTIVE
    if states.up == frozenset({"index", "middle"}):
        return Posture.STOP
    if states.up == frozenset({"index", "middle", "ring", "pinky"}):
        return Posture.ERASE
    return Posture.NEUTRAL


@dataclass
class PostureDebouncer:
    """Suppresses single-frame posture flicker.

    The emitted posture switches only after the same raw posture has been
    observed in `n_frames` consecutive frames; until then the previously
    emitted posture persists.  One debouncer per capture session.
    """

    n_frames: int = 3
    emitted: Posture = Posture.NEUTRAL
    _last_raw: Posture | None = field(default=None, repr=False)
    _streak: int = field(default=0, repr=False)

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValidationError(f"n_frames must be >= 1, got {self.n_frames}")

    def update(self, raw: Posture) -> Posture:
        if raw == self._last_raw:
            self._streak += 1
        else:
            self._last_raw = raw
            self._streak = 1
        if self._streak >= self.n_frames and raw != self.emitted:
            self.emitted = raw
        return self.emitted

    def reset(self):
        self.emitted = Posture.NEUTRAL
        self._last_raw = None
        self._streak = 0


def classify_posture(states: FingerStates, debounce: PostureDebouncer) -> Posture:
    """Debounced posture for one frame's finger states.  Total function."""
    return debounce.update(raw_posture(states))


def pointer_of(frame: LandmarkFrame) -> PointerSample:
    """Index fingertip scaled to capture-pixel coordinates."""
    x, y, _ = frame.points[POINTER_LANDMARK]
    return PointerSample(
        x_px=x * frame.width_px, y_px=y * frame.height_px, t_ms=frame.t_ms
    )
