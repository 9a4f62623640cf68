#!/usr/bin/env python3
"""Scoring trajectory alignment and flow accuracy.

Rotation error is the mean geodesic angle between per-frame rotations;
translation error compares camera centers after anchoring both paths at
their first camera and normalizing total path length to one (so global
scale cancels). Long source paths are subsampled at stride 8 ("basic") or
at the largest stride that still fits the clip ("difficult").
"""

import os

import numpy as np

import uniflow as uf

OUT = os.path.join(os.path.dirname(__file__), "out", "07_metrics")
os.makedirs(OUT, exist_ok=True)


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


# Ground truth: an arc. Prediction: same arc, mildly mis-rotated and
# rescaled (the scale should not matter).
n = 121
gt_centers = np.stack(
    [np.sin(np.linspace(0, 1.2, n)), np.zeros(n), np.linspace(0, 2.0, n)], axis=1
)
gt = uf.PoseTrajectory(
    [rot_z(0.01 * i) for i in range(n)], [-rot_z(0.01 * i) @ c for i, c in enumerate(gt_centers)]
)
pred_centers = 3.0 * gt_centers  # global scale
pred = uf.PoseTrajectory(
    [rot_z(0.01 * i + 0.05) for i in range(n)],
    [-rot_z(0.01 * i + 0.05) @ c for i, c in enumerate(pred_centers)],
)

print(f"rotation error: {uf.rotation_error(pred, gt):.4f} rad (constant 0.05 offset)")
print(f"translation error: {uf.translation_error(pred, gt):.6f} (scale removed)")

for mode in ("basic", "difficult"):
    p = uf.sample_trajectory(pred, mode, 16)
    g = uf.sample_trajectory(gt, mode, 16)
    print(
        f"{mode:10s} clip of {len(p)} frames: "
        f"T-Err {uf.translation_error(p, g):.6f}  R-Err {uf.rotation_error(p, g):.4f}"
    )

# Flow accuracy: endpoint error counts only jointly valid pixels, and the
# static-camera score is the median per-frame mean magnitude.
a = uf.FlowSequence([uf.FlowField.constant(32, 32, 1.0, 0.0) for _ in range(4)])
b = uf.FlowSequence([uf.FlowField.constant(32, 32, 1.3, 0.4) for _ in range(4)])
print("endpoint error:", uf.endpoint_error(b, a))
print("static score of the offset sequence:", uf.static_camera_score(b))

print("wrote", OUT)
