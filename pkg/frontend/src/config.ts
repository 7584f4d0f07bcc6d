/** Client configuration: service endpoints, drawing box, capture shape. */

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface ClientConfig {
  serviceUrl: string; // http(s) base, e.g. http://127.0.0.1:8765
  /** Guide rectangle drawn on the overlay, in video pixels (display only;
   *  the server clamps strokes to the canvas). */
  drawingBox: Rect;
  /** Selfie view: reflect x before sending so strokes match the mirror. */
  mirror: boolean;
  targetFps: number;
  videoWidth: number;
  videoHeight: number;
}

export const DEFAULT_CONFIG: ClientConfig = {
  serviceUrl: 'http://127.0.0.1:8765',
  drawingBox: { x: 80, y: 60, w: 480, h: 360 },
  mirror: true,
  targetFps: 15,
  videoWidth: 640,
  videoHeight: 480,
};

export function validateConfig(cfg: ClientConfig): string[] {
  const problems: string[] = [];
  if (cfg.targetFps < 1) problems.push('targetFps must be >= 1');
  if (cfg.videoWidth < 1 || cfg.videoHeight < 1)
    problems.push('video dimensions must be >= 1');
  const box = cfg.drawingBox;
  if (box.w < 1 || box.h < 1) problems.push('drawing box must be non-empty');
  if (
    box.x < 0 ||
    box.y < 0 ||
    box.x + box.w > cfg.videoWidth ||
    box.y + box.h > cfg.videoHeight
  )
    problems.push('drawing box must lie within the video bounds');
  return problems;
}

export function wsUrl(cfg: ClientConfig): string {
  return cfg.serviceUrl.replace(/^http/, 'ws').replace(/\/$/, '') + '/ws';
}
