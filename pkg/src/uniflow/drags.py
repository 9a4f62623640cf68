"""User drag annotations: spline resampling, sparse flow, kernel densification.

A drag is an ordered 2-D point path drawn on the reference image. Each drag
is resampled to one position per frame; the displacement of frame l against
frame 0 becomes a sparse flow entry at the drag's starting pixel, and a
Gaussian kernel spreads those entries into a dense field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionMismatch
from .fields import FlowField, FlowSequence


def default_sigma(width: int, height: int) -> float:
    """Densifier bandwidth used when none is given: 5% of the longer side."""
    return 0.05 * max(width, height)


# Kernel support radius in sigmas; contributions beyond it are cut to zero
# and the background anchor equals the kernel weight at exactly this radius.
CUTOFF_SIGMAS = 4.0


class DragTrajectory:
    """One drawn path: at least two finite (x, y) points in pixels."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.array(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DataError(f"trajectory points must be (P, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise DataError(f"trajectory needs at least 2 points, got {pts.shape[0]}")
        if not np.isfinite(pts).all():
            raise DataError("trajectory contains non-finite points")
        pts.flags.writeable = False
        self.points = pts

    def __len__(self) -> int:
        return len(self.points)


class AnnotationSet:
    """All drags on one canvas, plus the clip length they animate."""

    __slots__ = ("trajectories", "width", "height", "num_frames")

    def __init__(self, trajectories, width: int, height: int, num_frames: int):
        if width < 1 or height < 1:
            raise DataError(f"canvas dims must be positive, got {width}x{height}")
        if num_frames < 2:
            raise DataError(f"annotation needs num_frames >= 2, got {num_frames}")
        trajectories = list(trajectories)
        for i, t in enumerate(trajectories):
            p = t.points
            if (p[:, 0] < 0).any() or (p[:, 0] >= width).any() or (p[:, 1] < 0).any() or (
                p[:, 1] >= height
            ).any():
                raise DataError(
                    f"trajectory {i} leaves the canvas [0,{width}) x [0,{height})"
                )
        self.trajectories = trajectories
        self.width = width
        self.height = height
        self.num_frames = num_frames


@dataclass
class SparseFlowSequence:
    """Per-frame maps from integer control pixel to its displacement.

    frames[l - 1] corresponds to frame l; keys are (x, y) pixel tuples and
    values are float (du, dv) arrays.
    """

    frames: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Annotation JSON:
# {"width": W, "height": H, "num_frames": L, "trajectories": [[[x,y],...],...]}
# ---------------------------------------------------------------------------

def annotation_from_dict(spec: dict) -> AnnotationSet:
    try:
        width = int(spec["width"])
        height = int(spec["height"])
        num_frames = int(spec["num_frames"])
        raw = spec["trajectories"]
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"annotation spec is malformed: {e}")
    return AnnotationSet([DragTrajectory(t) for t in raw], width, height, num_frames)


def annotation_to_dict(ann: AnnotationSet) -> dict:
    return {
        "width": ann.width,
        "height": ann.height,
        "num_frames": ann.num_frames,
        "trajectories": [[[float(x), float(y)] for x, y in t.points] for t in ann.trajectories],
    }


def load_annotation(path) -> AnnotationSet:
    with open(path, "r", encoding="utf-8") as fh:
        return annotation_from_dict(json.load(fh))


def save_annotation(ann: AnnotationSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(annotation_to_dict(ann), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------

def _catmull_rom(p0, p1, p2, p3, s):
    """Uniform Catmull-Rom segment between p1 and p2 at local parameter s."""
    s = s[:, None]
    return 0.5 * (
        2.0 * p1
        + (-p0 + p2) * s
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s**2
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * s**3
    )


def resample_trajectory(traj: DragTrajectory, num_frames: int) -> np.ndarray:
    """Resample a drawn path to one position per frame, shape (L, 2).

    Uses a uniform Catmull-Rom spline through the points (piecewise linear
    when fewer than 4 points are available). The first and last outputs
    equal the first and last input points exactly.
    """
    if num_frames < 2:
        raise DataError(f"resampling needs num_frames >= 2, got {num_frames}")
    pts = traj.points
    n = len(pts)
    u = np.linspace(0.0, n - 1.0, num_frames)
    seg = np.clip(np.floor(u).astype(int), 0, n - 2)
    s = u - seg
    if n < 4:
        out = (1.0 - s)[:, None] * pts[seg] + s[:, None] * pts[seg + 1]
    else:
        pad = np.vstack([pts[0], pts, pts[-1]])  # duplicate-endpoint tangents
        out = _catmull_rom(pad[seg], pad[seg + 1], pad[seg + 2], pad[seg + 3], s)
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


# ---------------------------------------------------------------------------
# Sparse flow and densification
# ---------------------------------------------------------------------------

def sparse_flow(ann: AnnotationSet) -> SparseFlowSequence:
    """Anchor every drag at its rounded start pixel and difference against frame 0.

    Frame l's map sends the control pixel to (resampled position at l) minus
    (position at 0). Drags that round to the same pixel average their
    displacements.
    """
    num_flow = ann.num_frames - 1
    sums = [dict() for _ in range(num_flow)]
    counts = [dict() for _ in range(num_flow)]
    for traj in ann.trajectories:
        positions = resample_trajectory(traj, ann.num_frames)
        anchor = (
            min(max(int(round(positions[0, 0])), 0), ann.width - 1),
            min(max(int(round(positions[0, 1])), 0), ann.height - 1),
        )
        disp = positions[1:] - positions[0]
        for l in range(num_flow):
            if anchor in sums[l]:
                sums[l][anchor] = sums[l][anchor] + disp[l]
                counts[l][anchor] += 1
            else:
                sums[l][anchor] = disp[l].copy()
                counts[l][anchor] = 1
    frames = []
    for l in range(num_flow):
        frames.append({k: sums[l][k] / counts[l][k] for k in sums[l]})
    return SparseFlowSequence(frames)


def densify_frame(
    entries: dict, width: int, height: int, sigma: float
) -> FlowField:
    """Spread one frame's sparse displacements into a dense field.

    Blend rule per pixel p with control points c_i carrying flows f_i:

        F(p) = sum_i w_i(p) f_i / (sum_i w_i(p) + eps_bg)
        w_i(p) = exp(-|p - c_i|^2 / (2 sigma^2)),  zero beyond 4 sigma
        eps_bg = exp(-(4 sigma)^2 / (2 sigma^2)) = exp(-8)

    The background term pulls unsupported pixels toward zero; at each
    control pixel the blend is overridden with the exact sparse value.
    """
    if sigma <= 0:
        raise DataError(f"densify sigma must be positive, got {sigma}")
    if not entries:
        return FlowField.zeros(width, height)
    r_cut = CUTOFF_SIGMAS * sigma
    eps_bg = float(np.exp(-(r_cut**2) / (2.0 * sigma**2)))
    num = np.zeros((height, width, 2))
    den = np.full((height, width), eps_bg)
    reach = int(np.ceil(r_cut))
    for (cx, cy), f in entries.items():
        x0, x1 = max(cx - reach, 0), min(cx + reach + 1, width)
        y0, y1 = max(cy - reach, 0), min(cy + reach + 1, height)
        ys, xs = np.mgrid[y0:y1, x0:x1]
        d2 = (xs - cx) ** 2.0 + (ys - cy) ** 2.0
        w = np.where(d2 <= r_cut**2, np.exp(-d2 / (2.0 * sigma**2)), 0.0)
        num[y0:y1, x0:x1] += w[..., None] * np.asarray(f, dtype=np.float64)
        den[y0:y1, x0:x1] += w
    data = num / den[..., None]
    for (cx, cy), f in entries.items():
        data[cy, cx] = f
    return FlowField(data)


def densify(
    sparse: SparseFlowSequence, width: int, height: int, sigma: float
) -> FlowSequence:
    """Densify every frame of a sparse sequence; empty maps give zero fields."""
    if not sparse.frames:
        raise DimensionMismatch("sparse sequence has no frames")
    return FlowSequence(
        [densify_frame(entries, width, height, sigma) for entries in sparse.frames]
    )


def drag_flow(ann: AnnotationSet, sigma: float | None = None) -> FlowSequence:
    """Full drag pipeline: resample, sparse flow, then densify."""
    if sigma is None:
        sigma = default_sigma(ann.width, ann.height)
    return densify(sparse_flow(ann), ann.width, ann.height, sigma)
