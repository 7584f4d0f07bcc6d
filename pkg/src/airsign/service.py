"""Realtime signing service.

WebSocket /ws streams landmark frames in and stroke events out; an
explicit finish message returns the exported signature PNG.  HTTP
endpoints enroll reference signatures and verify probes against them.

Inbound WS:  {"type": "frame", "t_ms", "w", "h", "pts"} | {"type": "finish"}
             | {"type": "clear"}
Outbound WS: {"type": "event", "posture", "event", "point"} |
             {"type": "signature", "png_base64"} | {"type": "error", "msg"}
"""

from __future__ import annotations

import base64
import binascii
import json
import threading
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .capture import CaptureSession
from .errors import AirsignError, DataError, EmptySignatureError, \
    ValidationError
from .preprocess import preprocess
from .strokes import SignatureImage, SmoothingConfig
from .traces import frame_from_payload
from .verify import SiameseModel, verify_user

INDEX_NAME = "index.json"


class EnrollmentStore:
    """Filesystem store: one subdirectory of reference PNGs per user plus an
    index JSON pinning the model version and threshold.

    A store written under a different model version refuses to load so that
    re-calibration invalidates old decisions explicitly.  Mutations go
    through a single lock.
    """

    def __init__(self, root, model_version: str, threshold: float):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        index_path = self.root / INDEX_NAME
        if index_path.exists():
            index = json.loads(index_path.read_text(encoding="utf-8"))
            if index.get("model_version") != model_version:
                raise DataError(
                    f"store {self.root} was enrolled under model "
                    f"{index.get('model_version')!r}, now running "
                    f"{model_version!r}; re-enroll with the new model")
            self.users = {u: list(files) for u, files in
                          index.get("users", {}).items()}
            missing = [f for files in self.users.values() for f in files
                       if not (self.root / f).exists()]
            if missing:
                raise DataError(f"index lists missing files: {missing[:3]}")
            self.threshold = float(index["threshold"])
        else:
            self.users = {}
            self.threshold = float(threshold)
        self.model_version = model_version
        self._write_index()

    def _write_index(self) -> None:
        index = {"model_version": self.model_version,
                 "threshold": self.threshold,
                 "users": self.users}
        (self.root / INDEX_NAME).write_text(
            json.dumps(index, indent=2, sort_keys=True), encoding="utf-8")

    def enroll(self, user: str, png_bytes: bytes) -> str:
        SignatureImage.from_png_bytes(png_bytes)  # validate before storing
        with self._lock:
            files = self.users.setdefault(user, [])
            name = f"{user}/ref{len(files):04d}.png"
            path = self.root / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(png_bytes)
            files.append(name)
            self._write_index()
        return name

    def has_user(self, user: str) -> bool:
        return user in self.users

    def references(self, user: str) -> list:
        return [SignatureImage.load_png(self.root / f)
                for f in self.users.get(user, [])]


class _EnrollRequest(BaseModel):
    user: str
    png_base64: str


class _VerifyRequest(BaseModel):
    user: str
    png_base64: str


def _decode_png(b64: str) -> bytes:
    try:
        return base64.b64decode(b64, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValidationError(f"png_base64 is not valid base64: {exc}") from exc


def create_app(model: SiameseModel, store: EnrollmentStore,
               model_version: str, debounce_n: int = 3,
               smoothing: SmoothingConfig | None = None) -> FastAPI:
    app = FastAPI(title="airsign service")
    smoothing = smoothing or SmoothingConfig()
    _, in_h, in_w = model.net.input_shape

    def prep(img: SignatureImage):
        return preprocess(img, in_h, in_w)

    @app.exception_handler(AirsignError)
    async def _airsign_error(_, exc: AirsignError):
        status = 400 if isinstance(exc, ValidationError) else 422
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/health")
    async def health():
        return {"status": "ok", "model_version": model_version}

    @app.post("/enroll")
    async def enroll(req: _EnrollRequest):
        ref_id = store.enroll(req.user, _decode_png(req.png_base64))
        return {"user": req.user, "reference_id": ref_id}

    @app.post("/verify")
    async def verify(req: _VerifyRequest):
        if not store.has_user(req.user):
            return JSONResponse(status_code=404,
                                content={"error": f"unknown user {req.user!r}"})
        probe = prep(SignatureImage.from_png_bytes(_decode_png(req.png_base64)))
        refs = [prep(r) for r in store.references(req.user)]
        d, accepted = verify_user(model, refs, probe, store.threshold)
        return {"distance": d, "threshold": store.threshold,
                "accepted": accepted}

    @app.websocket("/ws")
    async def ws_session(ws: WebSocket):
        # One capture session per connection; sessions never share state.
        await ws.accept()
        cap = CaptureSession(debounce_n=debounce_n, smoothing=smoothing)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error",
                                        "msg": "malformed JSON"})
                    continue
                await _handle_message(ws, cap, msg)
        except WebSocketDisconnect:
            pass

    async def _handle_message(ws: WebSocket, cap: CaptureSession, msg) -> None:
        kind = msg.get("type") if isinstance(msg, dict) else None
        if kind == "frame":
            try:
                frame = frame_from_payload(msg)
                result = cap.process_frame(frame)
            except ValidationError as exc:
                await ws.send_json({"type": "error", "msg": str(exc)})
                return
            await ws.send_json({
                "type": "event",
                "posture": result.posture.value,
                "event": result.event,
                "point": list(result.point) if result.point else None,
            })
        elif kind == "finish":
            try:
                img = cap.finish()
            except EmptySignatureError as exc:
                await ws.send_json({"type": "error", "msg": str(exc)})
                return
            cap.reset()
            await ws.send_json({
                "type": "signature",
                "png_base64": base64.b64encode(img.to_png_bytes()).decode(),
            })
        elif kind == "clear":
            cap.clear()
            await ws.send_json({"type": "event", "posture":
                                cap.debouncer.emitted.value,
                                "event": "cleared", "point": None})
        else:
            await ws.send_json({"type": "error",
                                "msg": f"unknown message type {kind!r}"})

    return app
