"""Classification losses and their analytic gradients.

Three loss families are implemented on raw logit vectors:

* focal loss  -(1 - q_true)^gamma * log(q_true)  with softmax probabilities,
* its adaptive variant (same formula, per-sample gamma supplied by the caller),
* one-vs-rest sigmoid binary cross-entropy summed over classes.

All functions accept a single logit vector of shape (K,) or a batch of shape
(N, K); gradients are taken with respect to the logits. Gradients are
hand-derived, no autodiff involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class LossKind(str, Enum):
    FOCAL = "focal"
    ADAFOCAL = "adafocal"
    BCE = "bce"


@dataclass(frozen=True)
class LossConfig:
    """Training-loss selection plus the knobs shared by the focal family.

    gamma is the focusing parameter (focal only), lambda_ the multiplicative
    update rate of the adaptive variant, n_bins the confidence binning used
    both for calibration reports and for mapping samples to per-bin gammas.
    """

    kind: LossKind = LossKind.FOCAL
    gamma: float = 2.0
    lambda_: float = 1.0
    n_bins: int = 15
    gamma_clamp: tuple[float, float] = (0.0, 20.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LossKind(self.kind))
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not self.lambda_ > 0:
            raise ValueError(f"lambda_ must be > 0, got {self.lambda_}")
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")
        lo, hi = self.gamma_clamp
        if not lo <= hi:
            raise ValueError(f"gamma_clamp must satisfy low <= high, got {self.gamma_clamp}")


def _check_logits(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim not in (1, 2):
        raise ValueError(f"logits must be 1-D or 2-D, got shape {z.shape}")
    if z.shape[-1] < 2:
        raise ValueError(f"need at least 2 classes, got {z.shape[-1]}")
    if not np.all(np.isfinite(z)):
        raise ValueError("logits contain non-finite values")
    return z


def _check_labels(labels, n, k) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ValueError(f"labels shape {y.shape} does not match batch size {n}")
    if np.any(y < 0) or np.any(y >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    return y


def softmax(logits) -> np.ndarray:
    """Softmax over the last axis, max-subtracted so huge logits cannot overflow."""
    z = _check_logits(logits)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits) -> np.ndarray:
    z = _check_logits(logits)
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def sigmoid(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def cross_entropy(logits, labels):
    """Softmax cross-entropy -log q_true; the gamma=0 limit of the focal loss."""
    return focal_loss(logits, labels, 0.0)


def focal_loss(logits, labels, gamma):
    """-(1 - q_true)^gamma * log(q_true) with q = softmax(logits).

    gamma may be a scalar or, for batched input, a per-sample array. Returns a
    scalar for a single logit vector and an (N,) array for a batch.
    """
    z = _check_logits(logits)
    single = z.ndim == 1
    z2 = z[None, :] if single else z
    n, k = z2.shape
    y = _check_labels([labels] if single else labels, n, k)
    g = np.asarray(gamma, dtype=np.float64)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")
    logq = log_softmax(z2)[np.arange(n), y]
    q = np.exp(logq)
    # (1-q)^0 == 1.0 exactly, so gamma=0 reproduces cross-entropy bit for bit
    loss = -np.power(1.0 - q, g) * logq
    return float(loss[0]) if single else loss


def focal_loss_grad(logits, labels, gamma):
    """Gradient of the focal loss w.r.t. the logits.

    d/dz_j = (1-q)^(gamma-1) * (gamma*q*log(q) - (1-q)) * (onehot_j - p_j),
    which collapses to the softmax cross-entropy gradient p - onehot at
    gamma=0 (special-cased so the reduction is exact).
    """
    z = _check_logits(logits)
    single = z.ndim == 1
    z2 = z[None, :] if single else z
    n, k = z2.shape
    y = _check_labels([labels] if single else labels, n, k)
    g = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (n,)).copy()
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")

    p = softmax(z2)
    rows = np.arange(n)
    logq = log_softmax(z2)[rows, y]
    q = p[rows, y]
    rest = 1.0 - q

    onehot = np.zeros_like(p)
    onehot[rows, y] = 1.0

    factor = np.empty(n)
    zero_g = g == 0.0
    factor[zero_g] = -1.0  # -(onehot - p) == p - onehot
    nz = ~zero_g
    saturated = nz & (rest <= 0.0)  # q_true rounded to 1: loss minimum, zero slope
    factor[saturated] = 0.0
    live = nz & (rest > 0.0)
    factor[live] = np.power(rest[live], g[live] - 1.0) * (
        g[live] * q[live] * logq[live] - rest[live]
    )

    grad = factor[:, None] * (onehot - p)
    return grad[0] if single else grad


def bce_loss(logits, labels):
    """One-vs-rest sigmoid binary cross-entropy summed over the K classes."""
    z = _check_logits(logits)
    single = z.ndim == 1
    z2 = z[None, :] if single else z
    n, k = z2.shape
    y = _check_labels([labels] if single else labels, n, k)
    onehot = np.zeros_like(z2)
    onehot[np.arange(n), y] = 1.0
    # y*softplus(-z) + (1-y)*softplus(z), with softplus(x) = log(1 + e^x)
    loss = (onehot * np.logaddexp(0.0, -z2) + (1.0 - onehot) * np.logaddexp(0.0, z2)).sum(axis=-1)
    return float(loss[0]) if single else loss


def bce_loss_grad(logits, labels):
    """Gradient of bce_loss: sigmoid(z_i) - y_i per class."""
    z = _check_logits(logits)
    single = z.ndim == 1
    z2 = z[None, :] if single else z
    n, k = z2.shape
    y = _check_labels([labels] if single else labels, n, k)
    onehot = np.zeros_like(z2)
    onehot[np.arange(n), y] = 1.0
    grad = sigmoid(z2) - onehot
    return grad[0] if single else grad
