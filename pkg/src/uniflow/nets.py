"""Minimal differentiable blocks: attention and a two-layer denoiser.

Everything runs in float64 with hand-written backward passes; the test
suite validates every gradient against central finite differences. No
autograd framework is involved.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import DataError, DimensionMismatch, FormatError


def _as_matrix(m, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DataError(f"{name} contains non-finite values")
    return arr


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to 1 even for huge logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def attention(q, k, v, scale=None) -> np.ndarray:
    """Scaled dot-product attention: softmax(q k^T * scale) v.

    q: (M, dk), k: (N, dk), v: (N, dv) -> (M, dv). scale defaults to
    1 / sqrt(dk); pass scale=1.0 for the unscaled variant.
    """
    q = _as_matrix(q, "q")
    k = _as_matrix(k, "k")
    v = _as_matrix(v, "v")
    if q.shape[1] != k.shape[1]:
        raise DimensionMismatch(f"q cols {q.shape[1]} != k cols {k.shape[1]}")
    if k.shape[0] != v.shape[0]:
        raise DimensionMismatch(f"k rows {k.shape[0]} != v rows {v.shape[0]}")
    if scale is None:
        scale = 1.0 / np.sqrt(q.shape[1])
    weights = softmax_rows(q @ k.T * scale)
    return weights @ v


def attention_backward(q, k, v, upstream, scale=None):
    """Exact gradients of attention w.r.t. q, k, v for a given upstream.

    Returns (dq, dk, dv). The softmax Jacobian contracts to
    dS = A * (dA - rowsum(dA * A)) with A the attention weights.
    """
    q = _as_matrix(q, "q")
    k = _as_matrix(k, "k")
    v = _as_matrix(v, "v")
    g = _as_matrix(upstream, "upstream")
    if scale is None:
        scale = 1.0 / np.sqrt(q.shape[1])
    if g.shape != (q.shape[0], v.shape[1]):
        raise DimensionMismatch(
            f"upstream must be ({q.shape[0]}, {v.shape[1]}), got {g.shape}"
        )
    weights = softmax_rows(q @ k.T * scale)
    dv = weights.T @ g
    d_weights = g @ v.T
    d_scores = weights * (d_weights - (d_weights * weights).sum(axis=1, keepdims=True))
    dq = d_scores @ k * scale
    dk = d_scores.T @ q * scale
    return dq, dk, dv


# ---------------------------------------------------------------------------
# Sinusoidal step features
# ---------------------------------------------------------------------------

def time_features(t, dim: int) -> np.ndarray:
    """Sinusoidal features of a timestep: interleaved sin/cos at dim/2 scales.

    t may be a scalar or a 1-D array; output is (dim,) or (len(t), dim).
    """
    if dim < 2 or dim % 2 != 0:
        raise DataError(f"time feature dim must be a positive even number, got {dim}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / half)
    angles = t_arr[:, None] * freqs[None, :]
    feats = np.empty((t_arr.shape[0], dim))
    feats[:, 0::2] = np.sin(angles)
    feats[:, 1::2] = np.cos(angles)
    return feats[0] if np.isscalar(t) or np.ndim(t) == 0 else feats


# ---------------------------------------------------------------------------
# Two-layer tanh denoiser
# ---------------------------------------------------------------------------

class ToyDenoiser:
    """tanh MLP that maps (x_t, step features) to a predicted noise vector.

    Parameters: w1 (data_dim + time_dim, hidden), b1, w2 (hidden, data_dim),
    b2. Initialization is uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), seeded.
    """

    def __init__(self, data_dim: int, hidden_dim: int, time_dim: int = 8, seed: int = 0):
        if data_dim < 1 or hidden_dim < 1:
            raise DataError("data_dim and hidden_dim must be positive")
        if time_dim < 2 or time_dim % 2 != 0:
            raise DataError(f"time_dim must be even and >= 2, got {time_dim}")
        self.data_dim = data_dim
        self.hidden_dim = hidden_dim
        self.time_dim = time_dim
        rng = np.random.default_rng(seed)
        fan1 = data_dim + time_dim
        self.w1 = rng.uniform(-1.0, 1.0, size=(fan1, hidden_dim)) / np.sqrt(fan1)
        self.b1 = rng.uniform(-1.0, 1.0, size=hidden_dim) / np.sqrt(fan1)
        self.w2 = rng.uniform(-1.0, 1.0, size=(hidden_dim, data_dim)) / np.sqrt(hidden_dim)
        self.b2 = rng.uniform(-1.0, 1.0, size=data_dim) / np.sqrt(hidden_dim)

    # -- parameter plumbing -------------------------------------------------

    def params(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def set_params(self, params: dict) -> None:
        for name in ("w1", "b1", "w2", "b2"):
            current = getattr(self, name)
            new = np.asarray(params[name], dtype=np.float64)
            if new.shape != current.shape:
                raise DimensionMismatch(f"{name}: shape {new.shape} != {current.shape}")
            setattr(self, name, new.copy())

    def zero_grads(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.params().items()}

    # -- forward / backward --------------------------------------------------

    def _features(self, x: np.ndarray, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=np.float64)
        if t_arr.ndim == 0:
            t_arr = np.full(x.shape[0], float(t_arr))
        if t_arr.shape[0] != x.shape[0]:
            raise DimensionMismatch(
                f"got {t_arr.shape[0]} timesteps for a batch of {x.shape[0]}"
            )
        return np.concatenate([x, time_features(t_arr, self.time_dim)], axis=1)

    def forward(self, x, t) -> np.ndarray:
        """Predict noise for x at step t. Accepts (D,) or a (N, D) batch."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.shape[1] != self.data_dim:
            raise DimensionMismatch(
                f"input dim {batch.shape[1]} != model data_dim {self.data_dim}"
            )
        feats = self._features(batch, t)
        hidden = np.tanh(feats @ self.w1 + self.b1)
        out = hidden @ self.w2 + self.b2
        return out[0] if single else out

    def backward(self, x, t, upstream):
        """Gradients of sum(upstream * forward(x, t)).

        Returns (grads, d_input) where grads maps parameter names to arrays
        summed over the batch and d_input matches x's shape.
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        g = np.asarray(upstream, dtype=np.float64)
        g = g[None, :] if single else g
        if g.shape != (batch.shape[0], self.data_dim):
            raise DimensionMismatch(
                f"upstream must be {(batch.shape[0], self.data_dim)}, got {g.shape}"
            )
        feats = self._features(batch, t)
        pre = feats @ self.w1 + self.b1
        hidden = np.tanh(pre)

        d_w2 = hidden.T @ g
        d_b2 = g.sum(axis=0)
        d_hidden = g @ self.w2.T
        d_pre = d_hidden * (1.0 - hidden**2)
        d_w1 = feats.T @ d_pre
        d_b1 = d_pre.sum(axis=0)
        d_feats = d_pre @ self.w1.T
        d_input = d_feats[:, : self.data_dim]
        grads = {"w1": d_w1, "b1": d_b1, "w2": d_w2, "b2": d_b2}
        return grads, (d_input[0] if single else d_input)


# ---------------------------------------------------------------------------
# Checkpoints: uint32 header length + JSON header + flat little-endian float64
# parameters in the fixed order w1, b1, w2, b2.
# ---------------------------------------------------------------------------

def save_checkpoint(model: ToyDenoiser, path, seed: int = 0, steps: int = 0) -> None:
    header = json.dumps(
        {
            "data_dim": model.data_dim,
            "hidden_dim": model.hidden_dim,
            "time_dim": model.time_dim,
            "seed": seed,
            "steps": steps,
        }
    ).encode("utf-8")
    flat = np.concatenate(
        [model.w1.reshape(-1), model.b1, model.w2.reshape(-1), model.b2]
    )
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(flat.astype("<f8").tobytes())


def load_checkpoint(path) -> tuple[ToyDenoiser, dict]:
    with open(path, "rb") as fh:
        raw_len = fh.read(4)
        if len(raw_len) < 4:
            raise FormatError(f"{path}: missing checkpoint header")
        (hlen,) = struct.unpack("<I", raw_len)
        try:
            meta = json.loads(fh.read(hlen).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise FormatError(f"{path}: bad checkpoint header: {e}")
        model = ToyDenoiser(
            meta["data_dim"], meta["hidden_dim"], meta["time_dim"], seed=meta.get("seed", 0)
        )
        n_params = sum(p.size for p in model.params().values())
        payload = fh.read(8 * n_params)
        if len(payload) != 8 * n_params:
            raise IOError(f"{path}: truncated parameter payload")
        flat = np.frombuffer(payload, dtype="<f8")
    offset = 0
    params = {}
    for name in ("w1", "b1", "w2", "b2"):
        shape = getattr(model, name).shape
        size = int(np.prod(shape))
        params[name] = flat[offset : offset + size].reshape(shape)
        offset += size
    model.set_params(params)
    return model, meta
