/**
 * Capture loop: pulls landmark detections from a source (the in-browser
 * hand-tracking model), rate-limits them to the target fps, applies the
 * mirror transform, and emits frame messages.  Frames without a detected
 * hand emit nothing.
 */

import { FramePayload, NUM_LANDMARKS, Point3 } from './protocol.js';

/** One detection callback per video frame; pts is null when no hand. */
export interface LandmarkSource {
  start(onFrame: (pts: Point3[] | null, tMs: number) => void): Promise<void>;
  stop(): void;
}

export interface CaptureOptions {
  targetFps: number;
  mirror: boolean;
  width: number;
  height: number;
}

export class CaptureLoop {
  private lastSentMs = -Infinity;
  private readonly minIntervalMs: number;

  constructor(
    private readonly source: LandmarkSource,
    private readonly send: (payload: FramePayload) => void,
    private readonly opts: CaptureOptions,
  ) {
    this.minIntervalMs = 1000 / opts.targetFps;
  }

  async start(): Promise<void> {
    await this.source.start((pts, tMs) => this.onDetection(pts, tMs));
  }

  stop(): void {
    this.source.stop();
  }

  /** Exposed for tests: a single detector tick. */
  onDetection(pts: Point3[] | null, tMs: number): boolean {
    if (pts === null) return false;
    // Half-millisecond slack: camera timestamps jitter, and demanding a
    // full interval would drop every other eligible frame at the boundary.
    if (tMs - this.lastSentMs < this.minIntervalMs - 0.5) return false;
    if (pts.length !== NUM_LANDMARKS) return false;
    this.lastSentMs = tMs;
    this.send({
      t_ms: Math.round(tMs),
      w: this.opts.width,
      h: this.opts.height,
      pts: this.opts.mirror ? pts.map(mirrorPoint) : pts,
    });
    return true;
  }
}

export function mirrorPoint([x, y, z]: Point3): Point3 {
  return [1 - x, y, z];
}
