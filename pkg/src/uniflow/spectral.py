"""Temporal frequency stabilization for token and flow sequences.

The frame axis of a feature stream is moved into the frequency domain with
a real FFT (unnormalized forward, 1/T inverse), scaled per frequency bin by
a non-negative weight vector, and transformed back. Attenuating the high
bins suppresses inter-frame flicker while leaving slow content untouched.

Token sequences are plain float arrays of shape (T, N, D): T frames of N
tokens with D channels.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DataError, DimensionMismatch
from .fields import FlowField, FlowSequence
from .nets import attention


def _as_tokens(seq) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim != 3:
        raise DimensionMismatch(f"token sequence must be (T, N, D), got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DataError("token sequence contains non-finite values")
    return arr


def num_bins(t: int) -> int:
    """Real-FFT bin count for a length-t frame axis."""
    return t // 2 + 1


def _check_weights(w, t: int, channels: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    bins = num_bins(t)
    if w.ndim == 1:
        if w.shape[0] != bins:
            raise DimensionMismatch(f"expected {bins} weights for T={t}, got {w.shape[0]}")
        w = w[:, None, None]
    elif w.ndim == 2:
        if w.shape != (bins, channels):
            raise DimensionMismatch(
                f"per-channel weights must be ({bins}, {channels}), got {w.shape}"
            )
        w = w[:, None, :]
    else:
        raise DimensionMismatch(f"weights must be 1-D or 2-D, got shape {w.shape}")
    if not np.isfinite(w).all() or (w < 0).any():
        raise DataError("spectral weights must be finite and non-negative")
    return w


def temporal_fft(seq) -> np.ndarray:
    """Complex spectrum along the frame axis, shape (T//2 + 1, N, D)."""
    return np.fft.rfft(_as_tokens(seq), axis=0)


def spectral_reweight(seq, weights) -> np.ndarray:
    """Scale each temporal frequency bin, then return to the time domain.

    Unit weights reproduce the input (up to FFT round-off); the output is
    real by construction since the weights act symmetrically on conjugate
    bins.
    """
    arr = _as_tokens(seq)
    t = arr.shape[0]
    w = _check_weights(weights, t, arr.shape[2])
    return np.fft.irfft(w * np.fft.rfft(arr, axis=0), n=t, axis=0)


def spectral_reweight_backward(seq, weights, upstream) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of sum(upstream * reweight(seq, w)) w.r.t. seq and weights.

    The filter is a symmetric linear map in the time domain, so the input
    gradient is the same reweighting applied to the upstream signal. Bin k
    of the weight gradient is Re(conj(FFT(upstream)_k) * FFT(seq)_k)
    scaled by c_k / T, where c_k is 2 for interior bins and 1 for the DC
    and (even T) Nyquist bins.
    """
    arr = _as_tokens(seq)
    g = _as_tokens(upstream)
    if g.shape != arr.shape:
        raise DimensionMismatch(f"upstream shape {g.shape} != sequence shape {arr.shape}")
    t = arr.shape[0]
    w = np.asarray(weights, dtype=np.float64)
    _check_weights(w, t, arr.shape[2])

    d_seq = spectral_reweight(g, w)

    spec_x = np.fft.rfft(arr, axis=0)
    spec_g = np.fft.rfft(g, axis=0)
    bins = num_bins(t)
    coef = np.full(bins, 2.0)
    coef[0] = 1.0
    if t % 2 == 0:
        coef[-1] = 1.0
    per_bin = (spec_g.conj() * spec_x).real * coef[:, None, None] / t
    if w.ndim == 1:
        d_w = per_bin.sum(axis=(1, 2))
    else:
        d_w = per_bin.sum(axis=1)
    return d_seq, d_w


def stabilized_attention(seq, weights, wq, wk, wv, scale=None) -> np.ndarray:
    """Per-frame token attention computed on the spectrally reweighted stream.

    Q, K, V are linear projections of reweight(seq, weights); each frame
    runs an independent scaled dot-product attention over its tokens.
    """
    arr = _as_tokens(seq)
    wq = np.asarray(wq, dtype=np.float64)
    wk = np.asarray(wk, dtype=np.float64)
    wv = np.asarray(wv, dtype=np.float64)
    d = arr.shape[2]
    for name, m in (("wq", wq), ("wk", wk), ("wv", wv)):
        if m.ndim != 2 or m.shape[0] != d:
            raise DimensionMismatch(f"{name} must be ({d}, out), got {m.shape}")
    if wq.shape[1] != wk.shape[1]:
        raise DimensionMismatch("wq and wk must project to the same width")
    smoothed = spectral_reweight(arr, weights)
    out = np.empty((arr.shape[0], arr.shape[1], wv.shape[1]))
    for t in range(arr.shape[0]):
        frame = smoothed[t]
        out[t] = attention(frame @ wq, frame @ wk, frame @ wv, scale=scale)
    return out


def flicker_metric(frames, channel_axis=None) -> float:
    """Mean squared temporal second difference; zero for static or linear motion.

    Accepts a FlowSequence, a list of FlowFields, or any array whose first
    axis is time. For flow inputs the squared norm sums the (u, v)
    components per pixel; for plain arrays every trailing axis is treated
    as a pixel axis unless ``channel_axis`` names the component axis.
    """
    if isinstance(frames, FlowSequence):
        arr = frames.stack()
        channel_axis = -1
    elif isinstance(frames, (list, tuple)) and frames and isinstance(frames[0], FlowField):
        arr = np.stack([f.data for f in frames])
        channel_axis = -1
    else:
        arr = np.asarray(frames, dtype=np.float64)
    if arr.shape[0] < 3:
        raise DataError(f"flicker metric needs at least 3 frames, got {arr.shape[0]}")
    second = arr[2:] - 2.0 * arr[1:-1] + arr[:-2]
    sq = second**2
    if channel_axis is not None:
        sq = sq.sum(axis=channel_axis)
    per_frame = sq.reshape(sq.shape[0], -1).mean(axis=1) if sq.ndim > 1 else sq
    return float(per_frame.mean())


# ---------------------------------------------------------------------------
# Named filters and flow-sequence filtering (CLI / preview surface)
# ---------------------------------------------------------------------------

def make_weights(name: str, t: int):
    """Build a weight vector from a filter name.

    identity    all-pass
    dc-only     keep only the temporal mean
    lowpass:k   keep bins 0..k, zero the rest
    """
    bins = num_bins(t)
    if name == "identity":
        return np.ones(bins)
    if name == "dc-only":
        w = np.zeros(bins)
        w[0] = 1.0
        return w
    if name.startswith("lowpass:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise DataError(f"lowpass cutoff must be an integer, got {name!r}")
        if k < 0:
            raise DataError(f"lowpass cutoff must be >= 0, got {k}")
        w = np.zeros(bins)
        w[: min(k, bins - 1) + 1] = 1.0
        return w
    raise DataError(f"unknown stabilization filter {name!r}")


def load_weights(path) -> np.ndarray:
    """Read a custom weight vector (JSON list, or list of lists per channel)."""
    with open(path, "r", encoding="utf-8") as fh:
        return np.asarray(json.load(fh), dtype=np.float64)


def reweight_flow_sequence(seq: FlowSequence, weights) -> FlowSequence:
    """Apply a temporal spectral filter to every pixel of a flow sequence.

    The filter acts circularly along the frame axis, so it targets
    oscillation around stationary content; a strongly trending clip has a
    wrap-around discontinuity whose ringing can raise the flicker metric.
    """
    t = len(seq)
    stacked = seq.stack().reshape(t, -1, 2)
    filtered = spectral_reweight(stacked, weights)
    h, w = seq.height, seq.width
    return FlowSequence(
        [FlowField(filtered[i].reshape(h, w, 2)) for i in range(t)]
    )
