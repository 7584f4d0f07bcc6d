#!/usr/bin/env python3
"""Write a deterministic 100-frame landmark trace: a two-stroke wave signed
with Active/Stop postures.  Useful as a replay fixture and CLI demo input.

Usage: python scripts/make_demo_trace.py [out.jsonl]
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from airsign.landmarks import Posture
from airsign.traces import posture_frame, write_trace


def demo_frames(width=640, height=480):
    frames = []

    def add(posture, x, y):
        frames.append(posture_frame(posture, (x, y), t_ms=len(frames) * 33,
                                    width_px=width, height_px=height))

    for _ in range(5):
        add(Posture.NEUTRAL, 0.1, 0.5)
    for i in range(55):
        t = i / 54
        add(Posture.ACTIVE, 0.1 + 0.8 * t,
            0.45 + 0.18 * math.sin(6.0 * t) + 0.08 * math.sin(17.0 * t))
    for _ in range(10):
        add(Posture.STOP, 0.9, 0.5)
    for i in range(25):
        t = i / 24
        add(Posture.ACTIVE, 0.25 + 0.5 * t, 0.62 + 0.1 * math.sin(9.0 * t))
    for _ in range(5):
        add(Posture.STOP, 0.75, 0.6)
    assert len(frames) == 100
    return frames


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "demo_trace.jsonl"
    write_trace(out, demo_frames())
    print(f"wrote 100 frames to {out}")
