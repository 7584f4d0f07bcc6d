/**
 * Webcam + hand-landmark source backed by the MediaPipe tasks-vision
 * bundle, loaded from a CDN at runtime so the client ships no model code.
 */

import { LandmarkSource } from './capture.js';
import { Point3 } from './protocol.js';

const TASKS_VISION_URL =
  'https://cdn.jsdelivr.net/npm/@mediapipe/tasks-vision@0.10.14';
const WASM_URL = `${TASKS_VISION_URL}/wasm`;
const MODEL_URL =
  'https://storage.googleapis.com/mediapipe-models/hand_landmarker/hand_landmarker/float16/1/hand_landmarker.task';

interface HandLandmarkerLike {
  detectForVideo(
    video: HTMLVideoElement,
    timestampMs: number,
  ): { landmarks: Array<Array<{ x: number; y: number; z: number }>> };
  close(): void;
}

export class MediaPipeSource implements LandmarkSource {
  private landmarker: HandLandmarkerLike | null = null;
  private running = false;
  private stream: MediaStream | null = null;

  constructor(
    private readonly video: HTMLVideoElement,
    private readonly width: number,
    private readonly height: number,
  ) {}

  async start(
    onFrame: (pts: Point3[] | null, tMs: number) => void,
  ): Promise<void> {
    const url = TASKS_VISION_URL;
    const vision = await import(/* @vite-ignore */ url);
    const fileset = await vision.FilesetResolver.forVisionTasks(WASM_URL);
    this.landmarker = (await vision.HandLandmarker.createFromOptions(fileset, {
      baseOptions: { modelAssetPath: MODEL_URL },
      runningMode: 'VIDEO',
      numHands: 1,
    })) as HandLandmarkerLike;

    this.stream = await navigator.mediaDevices.getUserMedia({
      video: { width: this.width, height: this.height },
    });
    this.video.srcObject = this.stream;
    await this.video.play();

    this.running = true;
    const tick = () => {
      if (!this.running || !this.landmarker) return;
      if (this.video.readyState >= 2) {
        const now = performance.now();
        const result = this.landmarker.detectForVideo(this.video, now);
        const hand = result.landmarks[0]; // first hand only
        onFrame(
          hand ? hand.map((p): Point3 => [clamp01(p.x), clamp01(p.y), p.z]) : null,
          now,
        );
      }
      requestAnimationFrame(tick);
    };
    requestAnimationFrame(tick);
  }

  stop(): void {
    this.running = false;
    this.landmarker?.close();
    this.landmarker = null;
    this.stream?.getTracks().forEach((t) => t.stop());
    this.stream = null;
  }
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}
