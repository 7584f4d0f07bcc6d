"""Landmark trace files: line-delimited JSON, one frame per line.

Line schema: {"t_ms": int, "w": int, "h": int, "pts": [[x, y, z] x 21]}.
The same payload (plus a "type" tag) travels over the streaming socket, so
a recorded live session replays through the CLI unchanged.  Also provides
synthetic frame builders used by demo scripts and test fixtures.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ValidationError
from .landmarks import (
    FINGER_PIPS,
    FINGER_TIPS,
    NUM_LANDMARKS,
    LandmarkFrame,
    Posture,
)

_POSTURE_FINGERS = {
    Posture.ACTIVE: ("index",),
    Posture.STOP: ("index", "middle"),
    Posture.ERASE: ("index", "middle", "ring", "pinky"),
    Posture.NEUTRAL: (),
}


def frame_to_payload(frame: LandmarkFrame) -> dict:
    return {
        "t_ms": frame.t_ms,
        "w": frame.width_px,
        "h": frame.height_px,
        "pts": [list(p) for p in frame.points],
    }


def frame_from_payload(payload: dict) -> LandmarkFrame:
    try:
        t_ms = payload["t_ms"]
        w = payload["w"]
        h = payload["h"]
        pts = payload["pts"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"frame payload missing field: {exc}") from exc
    if not isinstance(pts, list):
        raise ValidationError("pts must be a list of [x, y, z] triples")
    return LandmarkFrame(
        t_ms=t_ms,
        points=tuple(tuple(float(v) for v in p) for p in pts),
        width_px=w,
        height_px=h,
    )


def write_trace(path: str | Path, frames: Iterable[LandmarkFrame]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(frame_to_payload(frame)) + "\n")


def read_trace(path: str | Path) -> Iterator[LandmarkFrame]:
    """Yields frames from a trace file.

    Tolerates socket-style lines carrying a "type": "frame" tag; other
    message types are skipped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {lineno}: invalid JSON") from exc
            if payload.get("type") not in (None, "frame"):
                continue
            yield frame_from_payload(payload)


def posture_frame(
    posture: Posture,
    pointer_xy: tuple[float, float],
    t_ms: int,
    width_px: int = 640,
    height_px: int = 480,
) -> LandmarkFrame:
    """Builds a synthetic frame showing `posture` with the index fingertip
    at normalized `pointer_xy`.

    Fingertips sit 0.15 above (up) or below (down) their PIP joints so the
    strict-inequality finger test resolves unambiguously; keep pointer y in
    [0, 0.8] so raised-finger geometry stays inside [0, 1].
    """
    px, py = pointer_xy
    if not (0.0 <= px <= 1.0 and 0.0 <= py <= 0.8):
        raise ValidationError(f"pointer {pointer_xy} outside safe range")
    pts = [[0.5, 0.85, 0.0] for _ in range(NUM_LANDMARKS)]
    raised = _POSTURE_FINGERS[posture]
    for i, name in enumerate(FINGER_TIPS):
        tip, pip = FINGER_TIPS[name], FINGER_PIPS[name]
        x = px if name == "index" else 0.3 + 0.1 * i
        pts[tip] = [x, py, 0.0]
        if name in raised:
            pts[pip] = [x, py + 0.15, 0.0]
        else:
            pts[pip] = [x, max(0.0, py - 0.15), 0.0]
    return LandmarkFrame(
        t_ms=t_ms,
        points=tuple(tuple(p) for p in pts),
        width_px=width_px,
        height_px=height_px,
    )
