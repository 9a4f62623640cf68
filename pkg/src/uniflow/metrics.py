"""Trajectory alignment and flow quality metrics.

Rotation alignment uses the geodesic angle of the relative rotation per
frame. Translation alignment compares camera centers after anchoring each
trajectory at its first camera and normalizing its total path length to 1,
which removes global scale before measuring displacement.
"""

from __future__ import annotations

import numpy as np

from .cameras import CameraTrajectory, _orthonormalize
from .errors import DataError, DimensionMismatch
from .fields import FlowSequence


class PoseTrajectory:
    """World-to-camera (R, t) pairs; rotations validated on ingestion."""

    __slots__ = ("rotations", "translations")

    def __init__(self, rotations, translations):
        rot = [_orthonormalize(r) for r in rotations]
        self.rotations = np.stack(rot) if rot else np.empty((0, 3, 3))
        t = np.asarray(translations, dtype=np.float64)
        if t.shape != (len(rot), 3):
            raise DimensionMismatch(
                f"translations must be ({len(rot)}, 3), got shape {t.shape}"
            )
        if not np.isfinite(t).all():
            raise DataError("translations contain non-finite values")
        self.translations = t

    @classmethod
    def from_camera_trajectory(cls, traj: CameraTrajectory) -> "PoseTrajectory":
        return cls([f.rotation for f in traj], [f.translation for f in traj])

    def __len__(self) -> int:
        return len(self.rotations)

    def centers(self) -> np.ndarray:
        """Camera centers -R^T t, shape (F, 3)."""
        return -np.einsum("fij,fi->fj", self.rotations, self.translations)

    def subsample(self, indices) -> "PoseTrajectory":
        idx = list(indices)
        return PoseTrajectory(self.rotations[idx], self.translations[idx])


def _check_pair(pred: PoseTrajectory, gt: PoseTrajectory) -> None:
    if len(pred) != len(gt):
        raise DimensionMismatch(f"trajectory lengths differ: {len(pred)} vs {len(gt)}")
    if len(pred) < 2:
        raise DataError(f"alignment needs at least 2 frames, got {len(pred)}")


def rotation_error(pred: PoseTrajectory, gt: PoseTrajectory) -> float:
    """Mean geodesic angle (radians) of R_pred R_gt^T across frames.

    Bitwise-identical rotations contribute an exact zero; arccos of the
    clamped half-trace would otherwise report sqrt-of-epsilon noise.
    """
    _check_pair(pred, gt)
    rel = np.einsum("fij,fkj->fik", pred.rotations, gt.rotations)
    cos = np.clip((np.trace(rel, axis1=1, axis2=2) - 1.0) / 2.0, -1.0, 1.0)
    angles = np.arccos(cos)
    same = np.all(pred.rotations == gt.rotations, axis=(1, 2))
    angles[same] = 0.0
    return float(np.mean(angles))


def _normalized_centers(traj: PoseTrajectory) -> np.ndarray:
    centers = traj.centers()
    centered = centers - centers[0]
    path = float(np.linalg.norm(np.diff(centered, axis=0), axis=1).sum())
    if path > 0.0:
        centered = centered / path
    return centered


def translation_error(pred: PoseTrajectory, gt: PoseTrajectory) -> float:
    """Mean camera-center distance after per-trajectory path normalization.

    Each trajectory is anchored at its first camera and scaled so its total
    path length is 1; zero-length trajectories are compared unscaled. The
    result is invariant to a global similarity transform applied to both.
    """
    _check_pair(pred, gt)
    a = _normalized_centers(pred)
    b = _normalized_centers(gt)
    return float(np.mean(np.linalg.norm(a - b, axis=1)))


def sample_trajectory(full: PoseTrajectory, mode: str, clip_len: int) -> PoseTrajectory:
    """Subsample a source path for evaluation.

    basic     stride-8 subsampling to clip_len frames
    difficult maximal stride that still fits clip_len frames in the source
    """
    if clip_len < 2:
        raise DataError(f"clip_len must be >= 2, got {clip_len}")
    n = len(full)
    if mode == "basic":
        stride = 8
    elif mode == "difficult":
        stride = (n - 1) // (clip_len - 1)
        if stride < 1:
            raise DataError(
                f"source of {n} frames cannot fit {clip_len} frames at stride >= 1"
            )
    else:
        raise DataError(f"unknown sampling mode {mode!r}")
    last = stride * (clip_len - 1)
    if last > n - 1:
        raise DataError(
            f"source of {n} frames too short for clip_len {clip_len} at stride {stride}"
        )
    return full.subsample(range(0, last + 1, stride))


def endpoint_error(pred: FlowSequence, gt: FlowSequence) -> float:
    """Mean per-pixel L2 displacement difference over jointly valid pixels."""
    if (pred.width, pred.height) != (gt.width, gt.height) or len(pred) != len(gt):
        raise DimensionMismatch(
            f"sequences differ: {pred.width}x{pred.height}x{len(pred)} vs "
            f"{gt.width}x{gt.height}x{len(gt)}"
        )
    total = 0.0
    count = 0
    for p, g in zip(pred, gt):
        valid = p.mask_or_true() & g.mask_or_true()
        if valid.any():
            diff = p.data - g.data
            total += float(np.hypot(diff[..., 0], diff[..., 1])[valid].sum())
            count += int(valid.sum())
    return total / count if count else 0.0


def static_camera_score(seq: FlowSequence) -> float:
    """Median over frames of mean flow magnitude; lower means more static."""
    per_frame = [float(f.magnitude().mean()) for f in seq]
    return float(np.median(per_frame))
