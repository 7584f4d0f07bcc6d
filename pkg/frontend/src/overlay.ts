/**
 * Stroke overlay fed exclusively by server events: the service is the
 * source of truth for smoothing, so what the user sees is exactly what the
 * exported PNG will contain.
 */

import { Posture, ServerMessage } from './protocol.js';
import { Rect } from './config.js';

/** Minimal drawing surface so the renderer is testable without a DOM. */
export interface DrawSurface {
  clear(): void;
  line(x0: number, y0: number, x1: number, y1: number): void;
  dot(x: number, y: number): void;
  box(rect: Rect): void;
}

export interface OverlayCallbacks {
  onPosture?(posture: Posture): void;
  onSignature?(pngBase64: string): void;
  onError?(msg: string): void;
}

export class OverlayRenderer {
  private lastPoint: [number, number] | null = null;
  private pointCount = 0;

  constructor(
    private readonly surface: DrawSurface,
    private readonly drawingBox: Rect | null = null,
    private readonly callbacks: OverlayCallbacks = {},
  ) {
    this.reset();
  }

  get strokePointCount(): number {
    return this.pointCount;
  }

  handle(msg: ServerMessage): void {
    switch (msg.type) {
      case 'event':
        this.callbacks.onPosture?.(msg.posture);
        if (msg.event === 'cleared') {
          this.reset();
        } else if (msg.event === 'point_added' && msg.point) {
          this.addPoint(msg.point);
        } else if (msg.event === 'stroke_closed') {
          this.lastPoint = null;
        }
        break;
      case 'signature':
        this.callbacks.onSignature?.(msg.png_base64);
        break;
      case 'error':
        this.callbacks.onError?.(msg.msg);
        break;
    }
  }

  private addPoint([x, y]: [number, number]): void {
    if (this.lastPoint) {
      this.surface.line(this.lastPoint[0], this.lastPoint[1], x, y);
    } else {
      this.surface.dot(x, y);
    }
    this.lastPoint = [x, y];
    this.pointCount += 1;
  }

  reset(): void {
    this.lastPoint = null;
    this.pointCount = 0;
    this.surface.clear();
    if (this.drawingBox) this.surface.box(this.drawingBox);
  }
}
