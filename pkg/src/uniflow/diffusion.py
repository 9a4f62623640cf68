"""Desk-scale diffusion over flow latents.

The forward process jumps straight from a clean vector to step t:
x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps, with abar the cumulative
noise-retention schedule. The denoiser is trained to regress eps, and
ancestral sampling walks x_T ~ N(0, I) back to x_0 using the
eps-prediction posterior mean with sigma_t = sqrt(beta_t) noise.
"""

from __future__ import annotations

import numpy as np

from .codec import encode
from .errors import DataError, DimensionMismatch
from .fields import FlowField, FlowSequence
from .nets import ToyDenoiser, attention


class NoiseSchedule:
    """Per-step betas and the cumulative retention curve abar.

    abar must be strictly decreasing and stay in (0, 1]; the default linear
    schedule (1e-4 .. 0.02 over 100 steps) starts above 0.99.
    """

    __slots__ = ("betas", "alpha_bar")

    def __init__(self, betas):
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.shape[0] < 1:
            raise DataError(f"betas must be a non-empty 1-D array, got shape {betas.shape}")
        if not np.isfinite(betas).all() or (betas < 0).any() or (betas >= 1).any():
            raise DataError("betas must lie in [0, 1)")
        alpha_bar = np.cumprod(1.0 - betas)
        if (alpha_bar <= 0).any():
            raise DataError("schedule drives alpha_bar to zero or below")
        if not (np.diff(alpha_bar) < 0).all():
            raise DataError("alpha_bar must be strictly decreasing")
        self.betas = betas
        self.alpha_bar = alpha_bar

    @classmethod
    def linear(cls, t_steps: int = 100, beta_start: float = 1e-4, beta_end: float = 0.02):
        if t_steps < 1:
            raise DataError(f"schedule needs at least 1 step, got {t_steps}")
        return cls(np.linspace(beta_start, beta_end, t_steps))

    @classmethod
    def from_alpha_bar(cls, alpha_bar):
        """Rebuild per-step betas from an explicit cumulative curve."""
        abar = np.asarray(alpha_bar, dtype=np.float64)
        if abar.ndim != 1 or abar.shape[0] < 1:
            raise DataError("alpha_bar must be a non-empty 1-D array")
        if (abar <= 0).any() or (abar > 1).any():
            raise DataError("alpha_bar values must lie in (0, 1]")
        prev = np.concatenate([[1.0], abar[:-1]])
        sched = cls.__new__(cls)
        betas = 1.0 - abar / prev
        if (betas < 0).any():
            raise DataError("alpha_bar must be non-increasing")
        if not (np.diff(abar) < 0).all():
            raise DataError("alpha_bar must be strictly decreasing")
        sched.betas = betas
        sched.alpha_bar = abar
        return sched

    @property
    def t_steps(self) -> int:
        return len(self.betas)


def forward_diffuse(x0, t: int, sched: NoiseSchedule, seed=None, rng=None):
    """Noise a clean vector to step t in one jump; returns (x_t, eps).

    t is 1-based (1..t_steps). Deterministic given a seed.
    """
    if not 1 <= t <= sched.t_steps:
        raise DataError(f"step {t} outside schedule range 1..{sched.t_steps}")
    x0 = np.asarray(x0, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(seed)
    abar = sched.alpha_bar[t - 1]
    eps = rng.standard_normal(x0.shape)
    x_t = np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps
    return x_t, eps


def training_loss(model, batch, sched: NoiseSchedule, seed=None, rng=None):
    """Noise-regression loss on a batch, plus parameter gradients.

    Per sample: draw t uniformly, noise x0 to x_t, and score
    ||eps - model(x_t, t)||^2; the loss is the batch mean and the gradients
    are of that mean. The model only needs forward(x, t) and
    backward(x, t, upstream).
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[0] < 1:
        raise DataError(f"batch must be a non-empty (N, D) array, got shape {batch.shape}")
    if rng is None:
        rng = np.random.default_rng(seed)
    n = batch.shape[0]
    t = rng.integers(1, sched.t_steps + 1, size=n)
    abar = sched.alpha_bar[t - 1][:, None]
    eps = rng.standard_normal(batch.shape)
    x_t = np.sqrt(abar) * batch + np.sqrt(1.0 - abar) * eps

    pred = model.forward(x_t, t)
    resid = pred - eps
    loss = float((resid**2).sum(axis=1).mean())
    upstream = 2.0 * resid / n
    grads, _ = model.backward(x_t, t, upstream)
    return loss, grads


def _conditioned_input(x: np.ndarray, condition: np.ndarray | None) -> np.ndarray:
    """Augment each sample with an attention read over the condition rows.

    The sample is the query, the condition rows are key and value, and the
    attended vector is added residually. A zero condition leaves the input
    unchanged.
    """
    if condition is None:
        return x
    cond = np.asarray(condition, dtype=np.float64)
    if cond.ndim != 2 or cond.shape[1] != x.shape[-1]:
        raise DimensionMismatch(
            f"condition must be (M, {x.shape[-1]}), got shape {cond.shape}"
        )
    single = x.ndim == 1
    rows = x[None, :] if single else x
    attended = attention(rows, cond, cond)
    out = rows + attended
    return out[0] if single else out


def sample(model, sched: NoiseSchedule, shape, seed=None, condition=None) -> np.ndarray:
    """Ancestral sampling from t_steps down to 1.

    shape (D,) draws one vector; (N, D) draws a batch in lockstep.
    With a condition, the model sees x_t plus an attention read of the
    condition rows at every step.
    """
    shape = tuple(shape) if not np.isscalar(shape) else (int(shape),)
    if len(shape) == 1:
        batch_shape = (1,) + shape
        single = True
    elif len(shape) == 2:
        batch_shape = shape
        single = False
    else:
        raise DimensionMismatch(f"sample shape must be (D,) or (N, D), got {shape}")
    if batch_shape[1] != model.data_dim:
        raise DimensionMismatch(
            f"sample dim {batch_shape[1]} != model data_dim {model.data_dim}"
        )
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(batch_shape)
    for t in range(sched.t_steps, 0, -1):
        abar = sched.alpha_bar[t - 1]
        beta = sched.betas[t - 1]
        alpha = 1.0 - beta
        eps_hat = model.forward(_conditioned_input(x, condition), t)
        mean = (x - beta / np.sqrt(1.0 - abar) * eps_hat) / np.sqrt(alpha)
        if t > 1:
            x = mean + np.sqrt(beta) * rng.standard_normal(batch_shape)
        else:
            x = mean
    return x[0] if single else x


# ---------------------------------------------------------------------------
# Training loop (Adam)
# ---------------------------------------------------------------------------

def train(
    model: ToyDenoiser,
    dataset,
    sched: NoiseSchedule,
    steps: int,
    lr: float = 1e-3,
    betas=(0.9, 0.999),
    eps: float = 1e-8,
    batch_size: int = 32,
    seed: int = 0,
):
    """Adam-train the denoiser on a latent dataset; returns the loss curve.

    Batches are drawn with replacement from the dataset rows. Training is
    deterministic for a given seed and aborts with a diagnostic if the
    loss turns non-finite.
    """
    dataset = np.asarray(dataset, dtype=np.float64)
    if dataset.ndim != 2 or dataset.shape[0] < 1:
        raise DataError(f"dataset must be a non-empty (N, D) array, got {dataset.shape}")
    if steps < 0:
        raise DataError(f"steps must be >= 0, got {steps}")
    rng = np.random.default_rng(seed)
    params = {k: v.copy() for k, v in model.params().items()}
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    b1, b2 = betas
    losses = []
    for step in range(1, steps + 1):
        idx = rng.integers(0, dataset.shape[0], size=batch_size)
        loss, grads = training_loss(model, dataset[idx], sched, rng=rng)
        if not np.isfinite(loss):
            raise DataError(f"training diverged: non-finite loss at step {step}")
        losses.append(loss)
        for key in params:
            g = grads[key]
            m[key] = b1 * m[key] + (1.0 - b1) * g
            v[key] = b2 * v[key] + (1.0 - b2) * g**2
            m_hat = m[key] / (1.0 - b1**step)
            v_hat = v[key] / (1.0 - b2**step)
            params[key] = params[key] - lr * m_hat / (np.sqrt(v_hat) + eps)
        model.set_params(params)
    return model, np.asarray(losses)


# ---------------------------------------------------------------------------
# Reference two-mode latent dataset
# ---------------------------------------------------------------------------

def two_mode_flow_latents(copies: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Latents of constant (+1, 0) and (-1, 0) single-frame 8x8 flows.

    Each constant field compresses to a single latent cell, giving the
    two 2-D modes the sampling quality checks are measured against.
    Returns (dataset, modes) with the dataset alternating between modes.
    """
    modes = []
    for u in (1.0, -1.0):
        seq = FlowSequence([FlowField.constant(8, 8, u, 0.0)])
        modes.append(encode(seq).values.reshape(-1))
    modes = np.stack(modes)
    dataset = np.tile(modes, (copies, 1))
    return dataset, modes


# Reference two-mode run: the configuration the committed baseline numbers
# were produced with. The first beta is kept at 1e-2 (not the package-wide
# 1e-4 default) because the noise-regression target has slope ~1/sqrt(beta_1)
# near t=1, which a 2000-step training budget cannot fit otherwise.
REFERENCE_TWO_MODE = {
    "t_steps": 100,
    "beta_start": 0.01,
    "beta_end": 0.1,
    "hidden_dim": 128,
    "time_dim": 16,
    "lr": 1e-2,
    "batch_size": 64,
    "steps": 2000,
    "train_seed": 0,
    "sample_seed": 100,
    "sample_count": 200,
}


def mode_purity(samples: np.ndarray, modes: np.ndarray, radius: float = 0.5) -> float:
    """Fraction of samples within L2 radius of their nearest mode."""
    d = np.linalg.norm(samples[:, None, :] - modes[None, :, :], axis=2).min(axis=1)
    return float((d < radius).mean())


def run_two_mode_reference(config: dict | None = None) -> dict:
    """Train and sample the reference two-mode setup; returns the metrics.

    Also runs ancestral sampling with the closed-form optimal denoiser as a
    brute-force ceiling for comparison.
    """
    cfg = {**REFERENCE_TWO_MODE, **(config or {})}
    dataset, modes = two_mode_flow_latents()
    sched = NoiseSchedule.linear(cfg["t_steps"], cfg["beta_start"], cfg["beta_end"])
    model = ToyDenoiser(
        dataset.shape[1], cfg["hidden_dim"], time_dim=cfg["time_dim"], seed=cfg["train_seed"]
    )
    model, losses = train(
        model,
        dataset,
        sched,
        steps=cfg["steps"],
        lr=cfg["lr"],
        batch_size=cfg["batch_size"],
        seed=cfg["train_seed"],
    )
    samples = sample(
        model, sched, (cfg["sample_count"], dataset.shape[1]), seed=cfg["sample_seed"]
    )
    optimal = OptimalTwoModeDenoiser(modes, sched)
    optimal_samples = sample(
        optimal, sched, (cfg["sample_count"], dataset.shape[1]), seed=cfg["sample_seed"]
    )
    return {
        "config": cfg,
        "initial_loss": float(losses[0]),
        "final_loss": float(np.mean(losses[-50:])),
        "loss_ratio": float(np.mean(losses[-50:]) / losses[0]),
        "purity": mode_purity(samples, modes),
        "optimal_sampler_purity": mode_purity(optimal_samples, modes),
    }


class OptimalTwoModeDenoiser:
    """Closed-form optimal noise predictor for an equal-weight two-point dataset.

    For x0 in {m0, m1}, the posterior mean of x0 given x_t has a tanh form,
    which yields the exact optimal eps-prediction at every step. Serves as
    the brute-force baseline the learned model is compared against.
    """

    def __init__(self, modes: np.ndarray, sched: NoiseSchedule):
        modes = np.asarray(modes, dtype=np.float64)
        if modes.shape[0] != 2:
            raise DataError(f"expected exactly 2 modes, got {modes.shape[0]}")
        self.mu = (modes[0] - modes[1]) / 2.0
        self.center = (modes[0] + modes[1]) / 2.0
        self.sched = sched
        self.data_dim = modes.shape[1]

    def forward(self, x, t):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        rows = x[None, :] if single else x
        t_arr = np.atleast_1d(np.asarray(t))
        abar = self.sched.alpha_bar[t_arr - 1][:, None]
        a = np.sqrt(abar)
        s2 = 1.0 - abar
        centered = rows - a * self.center
        post = np.tanh((centered @ self.mu)[:, None] * a / s2) * self.mu
        eps_hat = (centered - a * post) / np.sqrt(s2)
        return eps_hat[0] if single else eps_hat

    def backward(self, x, t, upstream):
        return {}, np.zeros_like(np.asarray(x, dtype=np.float64))
