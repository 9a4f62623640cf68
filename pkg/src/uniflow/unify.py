"""Fusion of camera, drag, and reference controls into one flow sequence.

Every present control is first rendered to a dense flow sequence of the
bundle's declared size, then folded in the fixed order camera -> drags ->
reference, either additively or by sequential chaining. The engine never
arbitrates conflicting controls; it reports them.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .cameras import CameraTrajectory, camera_flow, load_trajectory, parse_depth_spec
from .drags import AnnotationSet, default_sigma, drag_flow, load_annotation
from .errors import ConfigError
from .fields import FlowSequence, compose_add, compose_chain, read_flow_sequence


@dataclass
class ControlBundle:
    """Validated set of motion controls sharing one canvas and clip length."""

    width: int
    height: int
    num_frames: int
    camera: tuple[CameraTrajectory, np.ndarray] | None = None  # (trajectory, depth)
    drags: AnnotationSet | None = None
    reference: FlowSequence | None = None
    drag_sigma: float | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.num_frames < 2:
            raise ConfigError(
                f"bundle needs positive dims and num_frames >= 2, got "
                f"{self.width}x{self.height}, L={self.num_frames}"
            )
        if self.camera is None and self.drags is None and self.reference is None:
            raise ConfigError("bundle must carry at least one control")
        if self.camera is not None:
            traj, depth = self.camera
            if len(traj) != self.num_frames:
                raise ConfigError(
                    f"camera control: trajectory has {len(traj)} frames, bundle declares "
                    f"{self.num_frames}"
                )
            if depth.shape != (self.height, self.width):
                raise ConfigError(
                    f"camera control: depth is {depth.shape[1]}x{depth.shape[0]}, bundle "
                    f"declares {self.width}x{self.height}"
                )
        if self.drags is not None:
            a = self.drags
            if (a.width, a.height, a.num_frames) != (self.width, self.height, self.num_frames):
                raise ConfigError(
                    f"drag control: annotation is {a.width}x{a.height} L={a.num_frames}, "
                    f"bundle declares {self.width}x{self.height} L={self.num_frames}"
                )
        if self.reference is not None:
            r = self.reference
            if (r.width, r.height) != (self.width, self.height):
                raise ConfigError(
                    f"reference control: flows are {r.width}x{r.height}, bundle declares "
                    f"{self.width}x{self.height}"
                )
            if len(r) != self.num_frames - 1:
                raise ConfigError(
                    f"reference control: {len(r)} fields do not cover L-1 = "
                    f"{self.num_frames - 1} frames"
                )

    def rendered_controls(self) -> list[tuple[str, FlowSequence]]:
        """Render each present control densely, in fold order."""
        out = []
        if self.camera is not None:
            traj, depth = self.camera
            out.append(("camera", camera_flow(traj, depth)))
        if self.drags is not None:
            sigma = self.drag_sigma or default_sigma(self.width, self.height)
            out.append(("drags", drag_flow(self.drags, sigma)))
        if self.reference is not None:
            out.append(("reference", self.reference))
        return out


def unify(bundle: ControlBundle, mode: str = "add") -> FlowSequence:
    """Fold the bundle's rendered controls into one dense flow sequence.

    mode "add" sums fields pointwise (order-free); mode "chain" composes
    them sequentially in the fixed order camera -> drags -> reference.
    A single present control passes through unchanged.
    """
    if mode not in ("add", "chain"):
        raise ConfigError(f"unknown composition mode {mode!r}")
    rendered = bundle.rendered_controls()
    combine = compose_add if mode == "add" else compose_chain
    _, acc = rendered[0]
    for _, seq in rendered[1:]:
        acc = FlowSequence([combine(a, b) for a, b in zip(acc, seq)])
    return acc


def conflict_report(bundle: ControlBundle) -> np.ndarray:
    """Per-frame agreement between pairs of rendered controls, in [-1, 1].

    For each frame, cosine similarity is averaged over pixels where both
    controls in a pair move by more than 0.1 px, then over pairs. Frames
    with no such overlap report a neutral 0.
    """
    rendered = bundle.rendered_controls()
    if len(rendered) < 2:
        raise ConfigError("conflict report needs at least 2 controls")
    n = bundle.num_frames - 1
    report = np.zeros(n)
    for l in range(n):
        pair_means = []
        for i in range(len(rendered)):
            for j in range(i + 1, len(rendered)):
                a = rendered[i][1][l].data
                b = rendered[j][1][l].data
                mag_a = np.hypot(a[..., 0], a[..., 1])
                mag_b = np.hypot(b[..., 0], b[..., 1])
                sel = (mag_a > 0.1) & (mag_b > 0.1)
                if sel.any():
                    dot = (a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1])[sel]
                    pair_means.append(float(np.mean(dot / (mag_a[sel] * mag_b[sel]))))
        report[l] = float(np.mean(pair_means)) if pair_means else 0.0
    return report


# ---------------------------------------------------------------------------
# Bundle spec JSON (file-referencing form used by the CLI):
# {
#   "width": .., "height": .., "num_frames": ..,  "mode": "add",
#   "camera":    {"trajectory": "traj.json", "depth": "constant:10"},
#   "drags":     {"annotation": "ann.json", "sigma": 4.0},
#   "reference": {"flows": "dir-or-list-of-.flo"}
# }
# ---------------------------------------------------------------------------

def load_bundle(path) -> tuple[ControlBundle, str]:
    """Load a bundle spec, resolving referenced files relative to the spec."""
    with open(path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        if isinstance(p, str) and not os.path.isabs(p):
            return os.path.join(base, p)
        return p

    try:
        width = int(spec["width"])
        height = int(spec["height"])
        num_frames = int(spec["num_frames"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bundle spec is malformed: {e}")
    mode = spec.get("mode", "add")

    camera = None
    if spec.get("camera") is not None:
        cam = spec["camera"]
        traj = load_trajectory(resolve(cam["trajectory"]))
        depth_spec = cam["depth"]
        if not (depth_spec.startswith("constant:") or depth_spec.startswith("ramp:")):
            depth_spec = resolve(depth_spec)
        depth = parse_depth_spec(depth_spec, width, height)
        camera = (traj, depth)

    drags = None
    sigma = None
    if spec.get("drags") is not None:
        d = spec["drags"]
        drags = load_annotation(resolve(d["annotation"]))
        sigma = d.get("sigma")

    reference = None
    if spec.get("reference") is not None:
        flows = spec["reference"]["flows"]
        if isinstance(flows, list):
            flows = [resolve(p) for p in flows]
        else:
            flows = resolve(flows)
        reference = read_flow_sequence(flows)

    bundle = ControlBundle(
        width=width,
        height=height,
        num_frames=num_frames,
        camera=camera,
        drags=drags,
        reference=reference,
        drag_sigma=sigma,
    )
    return bundle, mode
