/** Browser entry point: wires camera, socket, overlay, and controls. */

import { ServiceApi } from './api.js';
import { CaptureLoop } from './capture.js';
import { DEFAULT_CONFIG, validateConfig, wsUrl } from './config.js';
import { MediaPipeSource } from './landmarks.js';
import { DrawSurface, OverlayRenderer } from './overlay.js';
import { FramePayload, frameMessage } from './protocol.js';
import { TraceRecorder } from './recorder.js';
import { SessionSocket } from './socket.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function canvasSurface(ctx: CanvasRenderingContext2D): DrawSurface {
  return {
    clear() {
      ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    },
    line(x0, y0, x1, y1) {
      ctx.strokeStyle = '#16324f';
      ctx.lineWidth = 3;
      ctx.lineCap = 'round';
      ctx.beginPath();
      ctx.moveTo(x0, y0);
      ctx.lineTo(x1, y1);
      ctx.stroke();
    },
    dot(x, y) {
      ctx.fillStyle = '#16324f';
      ctx.beginPath();
      ctx.arc(x, y, 1.5, 0, Math.PI * 2);
      ctx.fill();
    },
    box(rect) {
      ctx.strokeStyle = 'rgba(22, 50, 79, 0.35)';
      ctx.lineWidth = 1;
      ctx.setLineDash([6, 4]);
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
      ctx.setLineDash([]);
    },
  };
}

async function boot(): Promise<void> {
  const cfg = { ...DEFAULT_CONFIG };
  const problems = validateConfig(cfg);
  if (problems.length) throw new Error(problems.join('; '));

  const video = el<HTMLVideoElement>('video');
  const canvas = el<HTMLCanvasElement>('overlay');
  const badge = el<HTMLSpanElement>('posture');
  const status = el<HTMLSpanElement>('status');
  const preview = el<HTMLImageElement>('preview');
  const user = el<HTMLInputElement>('user');
  canvas.width = cfg.videoWidth;
  canvas.height = cfg.videoHeight;
  if (cfg.mirror) video.style.transform = 'scaleX(-1)';

  const api = new ServiceApi(cfg.serviceUrl);
  const recorder = new TraceRecorder();
  let lastSignature: string | null = null;

  const overlay = new OverlayRenderer(
    canvasSurface(canvas.getContext('2d')!),
    cfg.drawingBox,
    {
      onPosture: (p) => {
        badge.textContent = p;
        badge.dataset.posture = p;
      },
      onSignature: (png) => {
        lastSignature = png;
        preview.src = `data:image/png;base64,${png}`;
        preview.hidden = false;
        status.textContent = 'signature captured';
      },
      onError: (msg) => {
        status.textContent = `service: ${msg}`;
      },
    },
  );

  const socket = new SessionSocket(wsUrl(cfg), {
    onMessage: (msg) => overlay.handle(msg),
    onStateChange: (up) => {
      status.textContent = up ? 'connected' : 'reconnecting…';
      if (up) overlay.reset(); // fresh session on the server side
    },
  });
  socket.connect();

  const sendFrame = (payload: FramePayload): void => {
    recorder.record(payload);
    socket.send(frameMessage(payload));
  };
  const source = new MediaPipeSource(video, cfg.videoWidth, cfg.videoHeight);
  const capture = new CaptureLoop(source, sendFrame, {
    targetFps: cfg.targetFps,
    mirror: cfg.mirror,
    width: cfg.videoWidth,
    height: cfg.videoHeight,
  });
  capture.start().catch((err) => {
    status.textContent = `camera/model failed: ${err.message ?? err}`;
  });

  el<HTMLButtonElement>('finish').onclick = () => {
    socket.send({ type: 'finish' });
  };
  el<HTMLButtonElement>('clear').onclick = () => {
    socket.send({ type: 'clear' });
  };

  const recordBtn = el<HTMLButtonElement>('record');
  recordBtn.onclick = () => {
    if (recorder.isRecording) {
      recorder.stop();
      recordBtn.textContent = 'record trace';
      const blob = new Blob([recorder.toTraceFile()],
                            { type: 'application/jsonl' });
      const a = document.createElement('a');
      a.href = URL.createObjectURL(blob);
      a.download = 'session_trace.jsonl';
      a.click();
      URL.revokeObjectURL(a.href);
    } else {
      recorder.start();
      recordBtn.textContent = 'stop + download';
    }
  };

  el<HTMLButtonElement>('enroll').onclick = async () => {
    if (!lastSignature) {
      status.textContent = 'finish a signature first';
      return;
    }
    try {
      const res = await api.enroll(user.value || 'demo', lastSignature);
      status.textContent = `enrolled ${res.reference_id}`;
    } catch (err) {
      status.textContent = `enroll failed: ${(err as Error).message}`;
    }
  };

  el<HTMLButtonElement>('verify').onclick = async () => {
    if (!lastSignature) {
      status.textContent = 'finish a signature first';
      return;
    }
    try {
      const res = await api.verify(user.value || 'demo', lastSignature);
      status.textContent = res.accepted
        ? `accepted, distance ${res.distance.toFixed(4)}`
        : `rejected, distance ${res.distance.toFixed(4)}`;
    } catch (err) {
      status.textContent = `verify failed: ${(err as Error).message}`;
    }
  };
}

boot().catch((err) => {
  const status = document.getElementById('status');
  if (status) status.textContent = `startup failed: ${err.message ?? err}`;
  console.error(err);
});
