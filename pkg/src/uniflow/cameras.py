"""Camera trajectories, per-pixel ray embeddings, and geometric flow.

Poses are world-to-camera: x_cam = R @ x_world + t, camera center -R^T t.
Pixel coordinates are the integer grid (x right, y down), index (0, 0) at
the top-left pixel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SingularityError
from .fields import FlowField, FlowSequence

ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        vals = (self.fx, self.fy, self.cx, self.cy)
        if not all(np.isfinite(v) for v in vals):
            raise DataError(f"intrinsics must be finite, got {vals}")
        if self.fx <= 0 or self.fy <= 0:
            raise DataError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


def _orthonormalize(r: np.ndarray) -> np.ndarray:
    """Validate a rotation; re-orthonormalize near-misses via polar decomposition.

    Deviations (max |R^T R - I|) below ORTHO_TOL are repaired, larger ones
    rejected, as are reflections (det <= 0).
    """
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise DataError(f"rotation must be 3x3, got {r.shape}")
    if not np.isfinite(r).all():
        raise DataError("rotation contains non-finite values")
    dev = float(np.abs(r.T @ r - np.eye(3)).max())
    if dev >= ORTHO_TOL:
        raise DataError(f"rotation deviates from orthonormal by {dev:.3e} (tol {ORTHO_TOL})")
    if np.linalg.det(r) <= 0:
        raise DataError("rotation has non-positive determinant (reflection)")
    if dev <= 1e-12:
        # already at float precision; repairing would only shuffle last bits
        # and break bitwise idempotence for repeated ingestion
        return r
    u, _, vt = np.linalg.svd(r)
    fixed = u @ vt
    if np.linalg.det(fixed) < 0:
        u[:, -1] = -u[:, -1]
        fixed = u @ vt
    return fixed


class CameraFrame:
    """One world-to-camera pose plus intrinsics."""

    __slots__ = ("rotation", "translation", "intrinsics")

    def __init__(self, rotation, translation, intrinsics: CameraIntrinsics):
        self.rotation = _orthonormalize(rotation)
        self.rotation.flags.writeable = False
        t = np.array(translation, dtype=np.float64).reshape(3)
        if not np.isfinite(t).all():
            raise DataError("translation contains non-finite values")
        t.flags.writeable = False
        self.translation = t
        self.intrinsics = intrinsics

    def center(self) -> np.ndarray:
        """Camera center in world coordinates (-R^T t)."""
        return -self.rotation.T @ self.translation


class CameraTrajectory:
    """Ordered camera frames; frame 0 is the reference view."""

    __slots__ = ("frames",)

    def __init__(self, frames):
        frames = list(frames)
        if not frames:
            raise DataError("trajectory needs at least one frame")
        self.frames = frames

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i) -> CameraFrame:
        return self.frames[i]


# ---------------------------------------------------------------------------
# Trajectory JSON: {"frames": [{"fx","fy","cx","cy","R":[9 row-major],"t":[3]}]}
# ---------------------------------------------------------------------------

def trajectory_from_dict(spec: dict) -> CameraTrajectory:
    try:
        raw = spec["frames"]
    except (KeyError, TypeError):
        raise DataError('trajectory spec needs a "frames" list')
    frames = []
    for i, f in enumerate(raw):
        try:
            intr = CameraIntrinsics(f["fx"], f["fy"], f["cx"], f["cy"])
            r = np.array(f["R"], dtype=np.float64).reshape(3, 3)
            t = np.array(f["t"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"trajectory frame {i} is malformed: {e}")
        frames.append(CameraFrame(r, t, intr))
    return CameraTrajectory(frames)


def trajectory_to_dict(traj: CameraTrajectory) -> dict:
    return {
        "frames": [
            {
                "fx": f.intrinsics.fx,
                "fy": f.intrinsics.fy,
                "cx": f.intrinsics.cx,
                "cy": f.intrinsics.cy,
                "R": [float(v) for v in f.rotation.reshape(-1)],
                "t": [float(v) for v in f.translation],
            }
            for f in traj
        ]
    }


def load_trajectory(path) -> CameraTrajectory:
    with open(path, "r", encoding="utf-8") as fh:
        return trajectory_from_dict(json.load(fh))


def save_trajectory(traj: CameraTrajectory, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trajectory_to_dict(traj), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Ray embeddings
# ---------------------------------------------------------------------------

def _pixel_grid(width: int, height: int) -> np.ndarray:
    """Homogeneous pixel coordinates [x, y, 1] as a (3, H, W) stack."""
    ys, xs = np.mgrid[0:height, 0:width]
    return np.stack([xs.astype(np.float64), ys.astype(np.float64), np.ones((height, width))])


def plucker_embed(
    traj: CameraTrajectory, width: int, height: int, mode: str = "literal"
) -> np.ndarray:
    """Per-pixel 6-vector ray embedding for every frame, shape (6, F, H, W).

    Channels 0..2 hold the ray moment t x d_hat, channels 3..5 the unit
    direction d_hat. Two direction constructions are offered:

    - "literal": d = R @ K @ [x, y, 1] + t. This is the embedding form the
      engine treats as canonical.
    - "inverse": d = R^T @ K^{-1} @ [x, y, 1], a world-space viewing ray,
      with the moment taken about the camera center.
    """
    if width < 1 or height < 1:
        raise DataError(f"embedding needs positive dims, got {width}x{height}")
    if mode not in ("literal", "inverse"):
        raise DataError(f"unknown plucker mode {mode!r}")
    pix = _pixel_grid(width, height).reshape(3, -1)  # (3, H*W)
    out = np.empty((6, len(traj), height, width))
    for f_idx, frame in enumerate(traj):
        k = frame.intrinsics.matrix()
        r = frame.rotation
        t = frame.translation
        if mode == "literal":
            d = r @ (k @ pix) + t[:, None]
            origin = t
        else:
            d = r.T @ np.linalg.solve(k, pix)
            origin = frame.center()
        norms = np.linalg.norm(d, axis=0)
        if (norms == 0).any():
            flat = int(np.argmax(norms == 0))
            raise SingularityError(
                f"zero-length ray at frame {f_idx}, pixel (x={flat % width}, y={flat // width})"
            )
        d_hat = d / norms
        moment = np.cross(origin, d_hat.T).T
        out[0:3, f_idx] = moment.reshape(3, height, width)
        out[3:6, f_idx] = d_hat.reshape(3, height, width)
    return out


# ---------------------------------------------------------------------------
# Geometric flow from poses + reference depth
# ---------------------------------------------------------------------------

def _same_pose(a: CameraFrame, b: CameraFrame) -> bool:
    return (
        np.array_equal(a.rotation, b.rotation)
        and np.array_equal(a.translation, b.translation)
        and a.intrinsics == b.intrinsics
    )


def camera_flow(traj: CameraTrajectory, depth: np.ndarray) -> FlowSequence:
    """Dense flow induced by camera motion over a rigid reference depth map.

    Each pixel of frame 0 is back-projected at its depth, moved into every
    later camera, and re-projected through that camera's intrinsics; the
    flow is the pixel displacement. Points landing behind a camera (z <= 0)
    are masked invalid and carry zero displacement.
    """
    if len(traj) < 2:
        raise DataError(f"camera flow needs at least 2 frames, got {len(traj)}")
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise DataError(f"depth must be a 2-D map, got shape {depth.shape}")
    if not np.isfinite(depth).all() or (depth <= 0).any():
        raise DataError("depth must be positive and finite everywhere")
    height, width = depth.shape

    ref = traj[0]
    pix = _pixel_grid(width, height).reshape(3, -1)
    # Back-project through the reference view: depth scales the unit-z ray.
    rays = np.linalg.solve(ref.intrinsics.matrix(), pix)
    cam0 = rays * depth.reshape(-1)
    world = ref.rotation.T @ (cam0 - ref.translation[:, None])

    ys, xs = np.mgrid[0:height, 0:width]
    fields = []
    for frame in traj.frames[1:]:
        if _same_pose(frame, ref):
            fields.append(
                FlowField(np.zeros((height, width, 2)), np.ones((height, width), dtype=bool))
            )
            continue
        cam = frame.rotation @ world + frame.translation[:, None]
        z = cam[2].reshape(height, width)
        valid = z > 0
        zsafe = np.where(valid, z, 1.0)
        intr = frame.intrinsics
        px = intr.fx * cam[0].reshape(height, width) / zsafe + intr.cx
        py = intr.fy * cam[1].reshape(height, width) / zsafe + intr.cy
        data = np.zeros((height, width, 2))
        data[..., 0] = np.where(valid, px - xs, 0.0)
        data[..., 1] = np.where(valid, py - ys, 0.0)
        fields.append(FlowField(data, valid))
    return FlowSequence(fields)


# ---------------------------------------------------------------------------
# Synthetic reference depth
# ---------------------------------------------------------------------------

def depth_proxy(kind: str, width: int, height: int, **params) -> np.ndarray:
    """Analytic reference depth map, strictly positive by construction.

    kinds:
      constant            params: value
      ramp / fronto-ramp  params: near, far (linear top-to-bottom)
    """
    if width < 1 or height < 1:
        raise DataError(f"depth proxy needs positive dims, got {width}x{height}")
    if kind == "fronto-ramp":
        kind = "ramp"
    if kind == "constant":
        value = float(params["value"])
        if value <= 0:
            raise DataError(f"constant depth must be positive, got {value}")
        return np.full((height, width), value)
    if kind == "ramp":
        near = float(params["near"])
        far = float(params["far"])
        if near <= 0 or far <= 0:
            raise DataError(f"ramp depths must be positive, got near={near} far={far}")
        if height == 1:
            col = np.array([near])
        else:
            col = near + (far - near) * np.arange(height) / (height - 1)
        return np.repeat(col[:, None], width, axis=1)
    raise DataError(f"unknown depth proxy kind {kind!r}")


def parse_depth_spec(spec: str, width: int, height: int) -> np.ndarray:
    """Parse a compact depth source: 'constant:10', 'ramp:5:15', or a PFM path."""
    if spec.startswith("constant:"):
        return depth_proxy("constant", width, height, value=float(spec.split(":", 1)[1]))
    if spec.startswith("ramp:"):
        _, near, far = spec.split(":")
        return depth_proxy("ramp", width, height, near=float(near), far=float(far))
    depth = read_pfm(spec)
    if depth.shape != (height, width):
        raise DataError(
            f"depth file {spec} is {depth.shape[1]}x{depth.shape[0]}, expected {width}x{height}"
        )
    if not np.isfinite(depth).all() or (depth <= 0).any():
        raise DataError(f"depth file {spec} must be positive and finite everywhere")
    return depth


# ---------------------------------------------------------------------------
# PFM depth files (grayscale "Pf", float32, rows stored bottom-to-top)
# ---------------------------------------------------------------------------

def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"Pf":
            raise DataError(f"{path}: not a grayscale PFM file")
        width, height = (int(v) for v in fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        payload = fh.read(4 * width * height)
        if len(payload) != 4 * width * height:
            raise IOError(f"{path}: truncated PFM payload")
        arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return arr[::-1].astype(np.float64)


def write_pfm(depth: np.ndarray, path) -> None:
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise DataError(f"PFM writer needs a 2-D map, got {depth.shape}")
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{depth.shape[1]} {depth.shape[0]}\n".encode())
        fh.write(b"-1.0\n")
        fh.write(depth[::-1].astype("<f4").tobytes())
