"""Local HTTP preview service backing the browser annotation studio.

Stateless JSON API:

  GET  /health        -> {"status": "ok"}
  POST /preview/flow  -> per-frame flow renderings (base64 PNG), raw .flo
                         payloads (base64), and summary stats
  POST /preview/warp  -> the posted reference image warped by the unified
                         flow, one base64 PNG per frame

Identical requests produce identical response bodies. Requests above the
configured preview limits are refused with 413; schema violations come
back as 400 with the offending field path.
"""

from __future__ import annotations

import base64
import io
import uuid
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .cameras import depth_proxy, trajectory_from_dict
from .drags import annotation_from_dict
from .errors import UniflowError
from .fields import flow_to_color, warp_backward
from .spectral import flicker_metric, make_weights, reweight_flow_sequence
from .unify import ControlBundle, conflict_report, unify

DEFAULT_LIMITS = {"max_dim": 512, "max_frames": 64}


class DepthSpec(BaseModel):
    kind: Literal["constant", "ramp", "fronto-ramp"]
    value: Optional[float] = None
    near: Optional[float] = None
    far: Optional[float] = None


class CameraSpec(BaseModel):
    frames: list[dict]


class AnnotationSpec(BaseModel):
    width: int
    height: int
    num_frames: int
    trajectories: list[list[list[float]]]


class PreviewRequest(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    num_frames: int = Field(ge=2)
    mode: Literal["add", "chain"] = "add"
    annotation: Optional[AnnotationSpec] = None
    camera: Optional[CameraSpec] = None
    depth: Optional[DepthSpec] = None
    drag_sigma: Optional[float] = None
    stabilization: Optional[str] = None
    max_magnitude: Optional[float] = None
    reference_image: Optional[str] = None  # base64 PNG, needed by /preview/warp


def _b64_png(rgb: np.ndarray) -> str:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(rgb).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _write_flo_bytes(field) -> bytes:
    import struct

    from .fields import FLO_MAGIC

    buf = io.BytesIO()
    buf.write(struct.pack("<f", FLO_MAGIC))
    buf.write(struct.pack("<ii", field.width, field.height))
    buf.write(field.data.astype("<f4").tobytes())
    return buf.getvalue()


def _build_bundle(req: PreviewRequest, fallback_sigma) -> ControlBundle:
    camera = None
    if req.camera is not None:
        traj = trajectory_from_dict({"frames": req.camera.frames})
        if req.depth is None:
            raise UniflowError("camera control requires a depth spec")
        d = req.depth
        if d.kind == "constant":
            if d.value is None:
                raise UniflowError("constant depth requires 'value'")
            depth = depth_proxy("constant", req.width, req.height, value=d.value)
        else:
            if d.near is None or d.far is None:
                raise UniflowError("ramp depth requires 'near' and 'far'")
            depth = depth_proxy("ramp", req.width, req.height, near=d.near, far=d.far)
        camera = (traj, depth)
    drags = None
    if req.annotation is not None:
        drags = annotation_from_dict(req.annotation.model_dump())
    sigma = req.drag_sigma if req.drag_sigma is not None else fallback_sigma
    return ControlBundle(
        width=req.width,
        height=req.height,
        num_frames=req.num_frames,
        camera=camera,
        drags=drags,
        drag_sigma=sigma,
    )


def create_app(limits: dict | None = None, drag_sigma: float | None = None) -> FastAPI:
    limits = {**DEFAULT_LIMITS, **(limits or {})}
    app = FastAPI(title="uniflow preview service", docs_url=None, redoc_url=None)

    try:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )
    except ImportError:  # pragma: no cover
        pass

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        errors = [
            {"path": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": errors})

    @app.exception_handler(UniflowError)
    async def _engine_handler(request: Request, exc: UniflowError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(Exception)
    async def _internal_handler(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"detail": "internal invariant breach", "id": uuid.uuid4().hex},
        )

    def check_limits(req: PreviewRequest):
        if req.width > limits["max_dim"] or req.height > limits["max_dim"]:
            return JSONResponse(
                status_code=413,
                content={
                    "detail": f"preview dims capped at {limits['max_dim']}x{limits['max_dim']}"
                },
            )
        if req.num_frames > limits["max_frames"]:
            return JSONResponse(
                status_code=413,
                content={"detail": f"preview frames capped at {limits['max_frames']}"},
            )
        return None

    def unified_sequence(req: PreviewRequest):
        bundle = _build_bundle(req, drag_sigma)
        seq = unify(bundle, req.mode)
        if req.stabilization and req.stabilization != "identity":
            weights = make_weights(req.stabilization, len(seq))
            seq = reweight_flow_sequence(seq, weights)
        return bundle, seq

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/preview/flow")
    async def preview_flow(req: PreviewRequest):
        over = check_limits(req)
        if over is not None:
            return over
        bundle, seq = unified_sequence(req)
        m = req.max_magnitude
        if m is None:
            m = max(float(f.magnitude().max()) for f in seq) or 1.0
        frames = [_b64_png(flow_to_color(f, m)) for f in seq]
        flows = [base64.b64encode(_write_flo_bytes(f)).decode("ascii") for f in seq]
        stats = {
            "max_magnitude": max(float(f.magnitude().max()) for f in seq),
            "flicker": flicker_metric(seq) if len(seq) >= 3 else None,
            "conflict": (
                [float(v) for v in conflict_report(bundle)]
                if len(bundle.rendered_controls()) >= 2
                else None
            ),
        }
        return {"frames": frames, "flows_flo": flows, "stats": stats}

    @app.post("/preview/warp")
    async def preview_warp(req: PreviewRequest):
        over = check_limits(req)
        if over is not None:
            return over
        if not req.reference_image:
            return JSONResponse(
                status_code=400,
                content={"detail": [{"path": "reference_image", "message": "required for warp"}]},
            )
        from PIL import Image

        try:
            raw = base64.b64decode(req.reference_image)
            image = np.asarray(Image.open(io.BytesIO(raw)).convert("RGB"), dtype=np.float64)
        except Exception:
            return JSONResponse(
                status_code=400,
                content={"detail": [{"path": "reference_image", "message": "not a decodable image"}]},
            )
        if image.shape[:2] != (req.height, req.width):
            return JSONResponse(
                status_code=400,
                content={
                    "detail": [
                        {
                            "path": "reference_image",
                            "message": f"image is {image.shape[1]}x{image.shape[0]}, "
                            f"request declares {req.width}x{req.height}",
                        }
                    ]
                },
            )
        _, seq = unified_sequence(req)
        frames = []
        for f in seq:
            warped = warp_backward(image, f)
            frames.append(_b64_png(np.clip(warped + 0.5, 0, 255).astype(np.uint8)))
        return {"frames": frames}

    return app
