/**
 * Session recorder: stores the exact outbound frame stream and serializes
 * it as a trace file (one JSON payload per line), the bridge between live
 * capture and CLI replay / test fixtures.
 */

import { FramePayload, traceLine } from './protocol.js';

export class TraceRecorder {
  private frames: FramePayload[] = [];
  private recording = false;

  get isRecording(): boolean {
    return this.recording;
  }

  get frameCount(): number {
    return this.frames.length;
  }

  start(): void {
    this.frames = [];
    this.recording = true;
  }

  stop(): void {
    this.recording = false;
  }

  record(payload: FramePayload): void {
    if (this.recording) this.frames.push(payload);
  }

  /** Line-delimited JSON, trailing newline, ready to save as .jsonl. */
  toTraceFile(): string {
    return this.frames.map(traceLine).join('\n') + (this.frames.length ? '\n' : '');
  }
}
