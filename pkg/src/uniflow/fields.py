"""Dense optical flow fields and frame-anchored sequences.

A flow field stores one 2-vector displacement (u, v) in pixels per pixel.
A sequence of fields is always anchored to frame 0: entry ``l`` of a
sequence holds the displacement from frame 0 to frame ``l + 1``, never the
motion between adjacent frames.

Fields are immutable once constructed (the backing arrays are marked
read-only), so every operation here is a pure function and safe to call
concurrently.
"""

from __future__ import annotations

import os
import struct
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError, DimensionMismatch, FormatError

FLO_MAGIC = 202021.25  # float32-exact tag at the head of a .flo file


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class FlowField:
    """Per-pixel displacement map of shape (height, width, 2), float64.

    ``valid_mask`` is either None (every pixel known) or a boolean
    (height, width) array marking pixels with a defined displacement.
    All stored values are finite; construction rejects NaN/Inf.
    """

    __slots__ = ("data", "valid_mask")

    def __init__(self, data, valid_mask=None):
        arr = np.array(data, dtype=np.float64, copy=True)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise DimensionMismatch(
                f"flow data must have shape (H, W, 2), got {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"flow field needs positive dims, got {arr.shape[:2]}")
        if not np.isfinite(arr).all():
            raise DataError("flow field contains non-finite values")
        self.data = _freeze(arr)
        if valid_mask is None:
            self.valid_mask = None
        else:
            mask = np.array(valid_mask, dtype=bool, copy=True)
            if mask.shape != arr.shape[:2]:
                raise DimensionMismatch(
                    f"valid_mask shape {mask.shape} != field shape {arr.shape[:2]}"
                )
            self.valid_mask = _freeze(mask)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, width: int, height: int) -> "FlowField":
        return cls(np.zeros((height, width, 2)))

    @classmethod
    def constant(cls, width: int, height: int, u: float, v: float) -> "FlowField":
        data = np.empty((height, width, 2))
        data[..., 0] = u
        data[..., 1] = v
        return cls(data)

    def magnitude(self) -> np.ndarray:
        """Euclidean displacement length per pixel, shape (H, W)."""
        return np.hypot(self.data[..., 0], self.data[..., 1])

    def mask_or_true(self) -> np.ndarray:
        if self.valid_mask is None:
            return np.ones(self.data.shape[:2], dtype=bool)
        return self.valid_mask

    def __repr__(self) -> str:
        return f"FlowField({self.width}x{self.height})"


class FlowSequence:
    """Ordered flow fields with identical dimensions, anchored to frame 0.

    ``frames[i]`` is the displacement field from frame 0 to frame i + 1,
    so a clip of L frames is represented by L - 1 fields.
    """

    __slots__ = ("frames",)

    def __init__(self, frames: Sequence[FlowField]):
        frames = list(frames)
        if not frames:
            raise DimensionMismatch("flow sequence needs at least one field")
        w, h = frames[0].width, frames[0].height
        for i, f in enumerate(frames):
            if f.width != w or f.height != h:
                raise DimensionMismatch(
                    f"frame {i} is {f.width}x{f.height}, expected {w}x{h}"
                )
        self.frames = frames

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def num_frames(self) -> int:
        """Frame count L of the underlying clip (fields cover 1..L-1)."""
        return len(self.frames) + 1

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[FlowField]:
        return iter(self.frames)

    def __getitem__(self, i) -> FlowField:
        return self.frames[i]

    def stack(self) -> np.ndarray:
        """All displacement data as one (T, H, W, 2) array."""
        return np.stack([f.data for f in self.frames])

    @classmethod
    def zeros(cls, width: int, height: int, count: int) -> "FlowSequence":
        return cls([FlowField.zeros(width, height) for _ in range(count)])

    def __repr__(self) -> str:
        return f"FlowSequence({len(self.frames)} fields, {self.width}x{self.height})"


# ---------------------------------------------------------------------------
# .flo interchange (little-endian: float32 magic, int32 w, int32 h, then
# h*w interleaved float32 (u, v) pairs). The on-disk precision is float32;
# fields whose values are float32-representable round-trip bit exactly.
# ---------------------------------------------------------------------------

def read_flo(path) -> FlowField:
    """Read a .flo file. The returned field has a None (all-valid) mask."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if len(head) < 4:
            raise FormatError(f"{path}: too short for a .flo header")
        (magic,) = struct.unpack("<f", head)
        if magic != np.float32(FLO_MAGIC):
            raise FormatError(f"{path}: bad magic {magic!r}, not a .flo file")
        dims = fh.read(8)
        if len(dims) < 8:
            raise FormatError(f"{path}: truncated dimension header")
        width, height = struct.unpack("<ii", dims)
        if width <= 0 or height <= 0:
            raise FormatError(f"{path}: non-positive dims {width}x{height}")
        count = width * height * 2
        payload = fh.read(4 * count)
        if len(payload) != 4 * count:
            raise IOError(
                f"{path}: truncated payload, expected {4 * count} bytes, got {len(payload)}"
            )
        arr = np.frombuffer(payload, dtype="<f4").reshape(height, width, 2)
    if not np.isfinite(arr).all():
        raise DataError(f"{path}: payload contains non-finite values")
    return FlowField(arr.astype(np.float64))


def write_flo(field: FlowField, path) -> None:
    """Write a field as .flo. Values are stored as float32; masks are dropped."""
    if not np.isfinite(field.data).all():
        raise DataError("refusing to write non-finite flow values")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<f", FLO_MAGIC))
        fh.write(struct.pack("<ii", field.width, field.height))
        fh.write(field.data.astype("<f4").tobytes())


def read_flow_sequence(paths_or_dir) -> FlowSequence:
    """Load a sequence from a directory of .flo files (sorted) or a path list."""
    if isinstance(paths_or_dir, (str, os.PathLike)) and os.path.isdir(paths_or_dir):
        names = sorted(n for n in os.listdir(paths_or_dir) if n.endswith(".flo"))
        if not names:
            raise FormatError(f"{paths_or_dir}: no .flo files found")
        paths = [os.path.join(paths_or_dir, n) for n in names]
    else:
        paths = list(paths_or_dir)
    return FlowSequence([read_flo(p) for p in paths])


def write_flow_sequence(seq: FlowSequence, directory) -> list:
    """Write frames as frame_0001.flo .. frame_NNNN.flo; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for i, field in enumerate(seq):
        p = os.path.join(directory, f"frame_{i + 1:04d}.flo")
        write_flo(field, p)
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# Visualization
# ---------------------------------------------------------------------------

def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB, all inputs/outputs in [0, 1]."""
    i = np.floor(h * 6.0).astype(int) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    rgb = np.empty(h.shape + (3,))
    for idx, (r_, g_, b_) in enumerate(
        [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)]
    ):
        sel = i == idx
        rgb[sel, 0] = r_[sel]
        rgb[sel, 1] = g_[sel]
        rgb[sel, 2] = b_[sel]
    return rgb


def flow_to_color(field: FlowField, max_magnitude: float | None = None) -> np.ndarray:
    """Render a field as an RGB uint8 image.

    Direction maps to hue, magnitude to saturation (clipped at
    ``max_magnitude``), so zero flow renders white. ``max_magnitude=None``
    normalizes by the field's own maximum.
    """
    u = field.data[..., 0]
    v = field.data[..., 1]
    mag = np.hypot(u, v)
    if max_magnitude is None:
        m = float(mag.max())
        if m <= 0.0:
            m = 1.0
    else:
        m = float(max_magnitude)
        if not (m > 0.0):
            raise DataError(f"max_magnitude must be positive, got {m}")
    sat = np.clip(mag / m, 0.0, 1.0)
    hue = (np.arctan2(v, u) / (2.0 * np.pi)) % 1.0
    rgb = _hsv_to_rgb(hue, sat, np.ones_like(sat))
    return (rgb * 255.0 + 0.5).astype(np.uint8)


# ---------------------------------------------------------------------------
# Sampling, warping, composition
# ---------------------------------------------------------------------------

def bilinear_sample(grid: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample grid (H, W) or (H, W, C) at float coords, clamping to the border."""
    h, w = grid.shape[:2]
    xc = np.clip(xs, 0.0, w - 1.0)
    yc = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xc).astype(int)
    y0 = np.floor(yc).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    if grid.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    g = grid.astype(np.float64, copy=False)
    top = g[y0, x0] * (1.0 - fx) + g[y0, x1] * fx
    bot = g[y1, x0] * (1.0 - fx) + g[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def warp_backward(image: np.ndarray, field: FlowField) -> np.ndarray:
    """Pull-back warp: output(p) = image(p + F(p)) with bilinear sampling.

    Out-of-bounds lookups clamp to the border (no dark halo). Returns float64.
    """
    image = np.asarray(image)
    if image.shape[:2] != (field.height, field.width):
        raise DimensionMismatch(
            f"image {image.shape[:2]} does not match field {(field.height, field.width)}"
        )
    ys, xs = np.mgrid[0 : field.height, 0 : field.width]
    return bilinear_sample(
        image, xs + field.data[..., 0], ys + field.data[..., 1]
    )


def _combined_mask(a: FlowField, b: FlowField):
    if a.valid_mask is None and b.valid_mask is None:
        return None
    return a.mask_or_true() & b.mask_or_true()


def compose_add(a: FlowField, b: FlowField) -> FlowField:
    """Pointwise sum of two fields (commutative, zero field is the identity)."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"cannot add {a.width}x{a.height} and {b.width}x{b.height} fields"
        )
    return FlowField(a.data + b.data, _combined_mask(a, b))


def compose_chain(a: FlowField, b: FlowField) -> FlowField:
    """Sequential composition: result(p) = a(p) + b(p + a(p)).

    b is looked up bilinearly at the displaced position (border-clamped),
    so chaining is exact for constant fields and order-sensitive otherwise.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"cannot chain {a.width}x{a.height} and {b.width}x{b.height} fields"
        )
    ys, xs = np.mgrid[0 : a.height, 0 : a.width]
    sampled = bilinear_sample(b.data, xs + a.data[..., 0], ys + a.data[..., 1])
    return FlowField(a.data + sampled, _combined_mask(a, b))


def add_flow_noise(seq: FlowSequence, sigma: float, seed: int) -> FlowSequence:
    """Add i.i.d. zero-mean Gaussian noise to every displacement component.

    Deterministic for a given seed; sigma = 0 returns an identical copy.
    """
    if sigma < 0:
        raise DataError(f"noise sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return FlowSequence([FlowField(f.data, f.valid_mask) for f in seq])
    rng = np.random.default_rng(seed)
    out = []
    for f in seq:
        noise = rng.normal(0.0, sigma, size=f.data.shape)
        out.append(FlowField(f.data + noise, f.valid_mask))
    return FlowSequence(out)
