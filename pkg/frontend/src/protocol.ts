/**
 * Wire contracts shared with the signing service.
 *
 * A frame payload is exactly one trace-file line:
 *   {"t_ms": int, "w": int, "h": int, "pts": [[x, y, z] x 21]}
 * The socket wraps it with {"type": "frame"}; recorded traces store the
 * bare payload so a browser session replays through the CLI unchanged.
 */

export const NUM_LANDMARKS = 21;

export type Point3 = [number, number, number];

export interface FramePayload {
  t_ms: number;
  w: number;
  h: number;
  pts: Point3[];
}

export type ClientMessage =
  | ({ type: 'frame' } & FramePayload)
  | { type: 'finish' }
  | { type: 'clear' };

export type Posture = 'active' | 'stop' | 'erase' | 'neutral';

export interface EventMessage {
  type: 'event';
  posture: Posture;
  event: string; // point_added | stroke_closed | cleared | none | frame_dropped
  point: [number, number] | null;
}

export interface SignatureMessage {
  type: 'signature';
  png_base64: string;
}

export interface ErrorMessage {
  type: 'error';
  msg: string;
}

export type ServerMessage = EventMessage | SignatureMessage | ErrorMessage;

export function frameMessage(payload: FramePayload): ClientMessage {
  return { type: 'frame', ...payload };
}

export function isValidFramePayload(value: unknown): value is FramePayload {
  if (typeof value !== 'object' || value === null) return false;
  const v = value as Record<string, unknown>;
  if (typeof v.t_ms !== 'number' || v.t_ms < 0) return false;
  if (typeof v.w !== 'number' || v.w < 1) return false;
  if (typeof v.h !== 'number' || v.h < 1) return false;
  if (!Array.isArray(v.pts) || v.pts.length !== NUM_LANDMARKS) return false;
  return v.pts.every(
    (p) =>
      Array.isArray(p) &&
      p.length === 3 &&
      p.every((c) => typeof c === 'number' && Number.isFinite(c)) &&
      p[0] >= 0 && p[0] <= 1 && p[1] >= 0 && p[1] <= 1,
  );
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof parsed !== 'object' || parsed === null) return null;
  const msg = parsed as Record<string, unknown>;
  switch (msg.type) {
    case 'event':
      if (typeof msg.posture === 'string' && typeof msg.event === 'string')
        return msg as unknown as EventMessage;
      return null;
    case 'signature':
      if (typeof msg.png_base64 === 'string')
        return msg as unknown as SignatureMessage;
      return null;
    case 'error':
      if (typeof msg.msg === 'string') return msg as unknown as ErrorMessage;
      return null;
    default:
      return null;
  }
}

/** Serialize one frame as a trace-file line (no socket "type" tag). */
export function traceLine(payload: FramePayload): string {
  return JSON.stringify({
    t_ms: payload.t_ms,
    w: payload.w,
    h: payload.h,
    pts: payload.pts,
  });
}
