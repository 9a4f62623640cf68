"""Deterministic flow compression: 4x temporal, 8x8 spatial block means.

Encoding stores the mean (u, v) of every 4-frame by 8x8-pixel cell; edge
cells average over their actual extent, so no padding bias enters. Decoding
rebuilds each cell as a locally linear patch centered on the cell's pixel
centroid, with per-axis gradients taken between neighboring cell means.
That reconstruction keeps every cell's mean exactly equal to its latent
value (round trips are idempotent) and is exact for globally constant and
globally linear flows.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionMismatch, FormatError
from .fields import FlowField, FlowSequence

T_BLOCK = 4
S_BLOCK = 8


def _axis_blocks(size: int, block: int):
    """Block boundaries and member centroids along one axis."""
    edges = list(range(0, size, block)) + [size]
    centroids = np.array([(lo + hi - 1) / 2.0 for lo, hi in zip(edges[:-1], edges[1:])])
    return edges, centroids


@dataclass
class LatentGrid:
    """Block means of shape (t_blocks, h_blocks, w_blocks, 2) plus source dims."""

    values: np.ndarray
    num_frames: int
    height: int
    width: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 4 or vals.shape[3] != 2:
            raise DimensionMismatch(
                f"latent values must be (Tb, Hb, Wb, 2), got shape {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise DataError("latent grid contains non-finite values")
        expect = (
            -(-self.num_frames // T_BLOCK),
            -(-self.height // S_BLOCK),
            -(-self.width // S_BLOCK),
        )
        if vals.shape[:3] != expect:
            raise DimensionMismatch(
                f"latent blocks {vals.shape[:3]} inconsistent with recorded dims "
                f"{self.num_frames}x{self.height}x{self.width} (expected {expect})"
            )
        self.values = vals

    @property
    def shape(self):
        return self.values.shape


def encode(seq: FlowSequence) -> LatentGrid:
    """Average-pool a flow sequence into 4-frame x 8x8-pixel cells."""
    data = seq.stack()  # (T, H, W, 2)
    t, h, w = data.shape[:3]
    te, _ = _axis_blocks(t, T_BLOCK)
    he, _ = _axis_blocks(h, S_BLOCK)
    we, _ = _axis_blocks(w, S_BLOCK)
    # Sum per axis with reduceat, then divide by the cell's true pixel count.
    sums = np.add.reduceat(data, te[:-1], axis=0)
    sums = np.add.reduceat(sums, he[:-1], axis=1)
    sums = np.add.reduceat(sums, we[:-1], axis=2)
    t_counts = np.diff(te)
    h_counts = np.diff(he)
    w_counts = np.diff(we)
    counts = (
        t_counts[:, None, None] * h_counts[None, :, None] * w_counts[None, None, :]
    )
    return LatentGrid(sums / counts[..., None], num_frames=t, height=h, width=w)


def _axis_slopes(values: np.ndarray, centroids: np.ndarray, axis: int) -> np.ndarray:
    if values.shape[axis] < 2:
        return np.zeros_like(values)
    return np.gradient(values, centroids, axis=axis)


def decode(lat: LatentGrid) -> FlowSequence:
    """Rebuild a flow sequence at the recorded dims from a latent grid."""
    vals = lat.values
    t, h, w = lat.num_frames, lat.height, lat.width
    _, tc = _axis_blocks(t, T_BLOCK)
    _, hc = _axis_blocks(h, S_BLOCK)
    _, wc = _axis_blocks(w, S_BLOCK)
    st = _axis_slopes(vals, tc, 0)
    sh = _axis_slopes(vals, hc, 1)
    sw = _axis_slopes(vals, wc, 2)

    ti = np.arange(t) // T_BLOCK
    hi = np.arange(h) // S_BLOCK
    wi = np.arange(w) // S_BLOCK
    dt = (np.arange(t) - tc[ti])[:, None, None, None]
    dh = (np.arange(h) - hc[hi])[None, :, None, None]
    dw = (np.arange(w) - wc[wi])[None, None, :, None]

    base = vals[np.ix_(ti, hi, wi)]
    full = (
        base
        + st[np.ix_(ti, hi, wi)] * dt
        + sh[np.ix_(ti, hi, wi)] * dh
        + sw[np.ix_(ti, hi, wi)] * dw
    )
    return FlowSequence([FlowField(full[i]) for i in range(t)])


# ---------------------------------------------------------------------------
# Latent files: uint32 header length + JSON header + little-endian float32
# block means in C order.
# ---------------------------------------------------------------------------

def save_latent(lat: LatentGrid, path) -> None:
    header = json.dumps(
        {
            "num_frames": lat.num_frames,
            "height": lat.height,
            "width": lat.width,
            "t_blocks": lat.values.shape[0],
            "h_blocks": lat.values.shape[1],
            "w_blocks": lat.values.shape[2],
        }
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(lat.values.astype("<f4").tobytes())


def load_latent(path) -> LatentGrid:
    with open(path, "rb") as fh:
        raw = fh.read(4)
        if len(raw) < 4:
            raise FormatError(f"{path}: missing latent header")
        (hlen,) = struct.unpack("<I", raw)
        try:
            meta = json.loads(fh.read(hlen).decode("utf-8"))
            shape = (meta["t_blocks"], meta["h_blocks"], meta["w_blocks"], 2)
            dims = (meta["num_frames"], meta["height"], meta["width"])
        except (UnicodeDecodeError, json.JSONDecodeError, KeyError) as e:
            raise FormatError(f"{path}: bad latent header: {e}")
        count = int(np.prod(shape))
        payload = fh.read(4 * count)
        if len(payload) != 4 * count:
            raise IOError(f"{path}: truncated latent payload")
        vals = np.frombuffer(payload, dtype="<f4").reshape(shape)
    return LatentGrid(vals.astype(np.float64), *dims)
