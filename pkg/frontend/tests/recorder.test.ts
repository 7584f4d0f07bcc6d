import { describe, expect, it } from 'vitest';

import { isValidFramePayload } from '../src/protocol.js';
import { TraceRecorder } from '../src/recorder.js';
import { samplePayload } from './protocol.test.js';

describe('trace recorder', () => {
  it('records only while active', () => {
    const rec = new TraceRecorder();
    rec.record(samplePayload(0)); // not recording yet
    rec.start();
    rec.record(samplePayload(33));
    rec.record(samplePayload(66));
    rec.stop();
    rec.record(samplePayload(99));
    expect(rec.frameCount).toBe(2);
  });

  it('produces replayable line-delimited JSON', () => {
    const rec = new TraceRecorder();
    rec.start();
    for (let i = 0; i < 5; i++) rec.record(samplePayload(i * 33));
    const text = rec.toTraceFile();
    expect(text.endsWith('\n')).toBe(true);
    const lines = text.trim().split('\n');
    expect(lines).toHaveLength(5);
    for (const line of lines) {
      const parsed = JSON.parse(line);
      expect(isValidFramePayload(parsed)).toBe(true);
      expect(Object.keys(parsed)).toEqual(['t_ms', 'w', 'h', 'pts']);
    }
  });

  it('round-trips the recorded frames exactly', () => {
    const rec = new TraceRecorder();
    rec.start();
    const frames = [samplePayload(0), samplePayload(33)];
    frames.forEach((f) => rec.record(f));
    const lines = rec.toTraceFile().trim().split('\n');
    expect(lines.map((l) => JSON.parse(l))).toEqual(frames);
  });

  it('empty recording yields an empty file', () => {
    const rec = new TraceRecorder();
    rec.start();
    expect(rec.toTraceFile()).toBe('');
  });

  it('start clears any previous session', () => {
    const rec = new TraceRecorder();
    rec.start();
    rec.record(samplePayload(0));
    rec.start();
    expect(rec.frameCount).toBe(0);
  });
});
