"""Post-hoc temperature scaling.

Divides logits by a fitted positive temperature (a single scalar or one value
per class) before the softmax, chosen to minimize validation NLL. Scalar
scaling never changes the argmax, so accuracy is untouched while confidence
moves toward the observed accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .losses import _check_logits, softmax

SCALAR = "scalar"
PER_CLASS = "per_class"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NotIdentifiableError(ValueError):
    """Temperature has no interior optimum (e.g. every label is the same class)."""

    code = "NOT_IDENTIFIABLE"


@dataclass(frozen=True)
class Temperature:
    mode: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.mode not in (SCALAR, PER_CLASS):
            raise ValueError(f"unknown temperature mode {self.mode!r}")
        if self.mode == SCALAR and len(self.values) != 1:
            raise ValueError("scalar mode takes exactly one value")
        for v in self.values:
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"temperatures must be finite and > 0, got {v}")

    def as_array(self, n_classes: int) -> np.ndarray:
        if self.mode == SCALAR:
            return np.full(n_classes, self.values[0])
        if len(self.values) != n_classes:
            raise ValueError(
                f"per-class temperature has {len(self.values)} entries, expected {n_classes}"
            )
        return np.asarray(self.values, dtype=np.float64)


def apply_temperature(logits, temperature: Temperature) -> np.ndarray:
    """Softmax of the temperature-divided logits; T=1 is the raw softmax."""
    z = _check_logits(logits)
    t = temperature.as_array(z.shape[-1])
    return softmax(z / t)


def _mean_nll(z: np.ndarray, labels: np.ndarray, t: np.ndarray) -> float:
    s = z / t
    shifted = s - s.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(lse - shifted[np.arange(len(labels)), labels]))


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    return (a + b) / 2.0


def _minimize_1d(f, lo: float, hi: float, tol: float, grid_points: int = 41) -> float:
    # coarse log-spaced grid to bracket the minimum, then golden-section refine
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), grid_points))
    values = [f(t) for t in grid]
    i = int(np.argmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid_points - 1)]
    return _golden_section(f, a, b, tol)


def fit_temperature(
    logits,
    labels,
    mode: str = SCALAR,
    bounds: tuple[float, float] = (0.05, 20.0),
    tol: float = 1e-4,
) -> Temperature:
    """Fit the temperature minimizing mean NLL of softmax(logits / T).

    Scalar mode runs a grid + golden-section search over bounds; per-class mode
    applies the same 1-D search coordinate-wise until the values settle.
    """
    z = _check_logits(logits)
    if z.ndim != 2:
        raise ValueError("fit_temperature expects a batch of logit vectors")
    n, k = z.shape
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ValueError(f"labels shape {y.shape} does not match {n} logit rows")
    if np.any(y < 0) or np.any(y >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    if n < k:
        raise ValueError(f"need at least as many samples ({n}) as classes ({k})")
    if len(np.unique(y)) < 2:
        raise NotIdentifiableError(
            "all labels belong to one class; NLL is monotone in the temperature"
        )
    lo, hi = bounds
    if not 0 < lo < hi:
        raise ValueError(f"invalid bounds {bounds}")

    if mode == SCALAR:
        t = _minimize_1d(lambda v: _mean_nll(z, y, np.float64(v)), lo, hi, tol)
        return Temperature(mode=SCALAR, values=(float(t),))

    if mode == PER_CLASS:
        t = np.ones(k)
        for _ in range(8):
            moved = 0.0
            for j in range(k):
                def nll_j(v, j=j):
                    tj = t.copy()
                    tj[j] = v
                    return _mean_nll(z, y, tj)

                best = _minimize_1d(nll_j, lo, hi, tol)
                moved = max(moved, abs(best - t[j]))
                t[j] = best
            if moved < tol:
                break
        return Temperature(mode=PER_CLASS, values=tuple(float(v) for v in t))

    raise ValueError(f"unknown temperature mode {mode!r}")


class TemperatureScaler(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit a temperature on (logits, labels), transform logits to probabilities."""

    def __init__(self, mode: str = SCALAR, bounds: tuple[float, float] = (0.05, 20.0), tol: float = 1e-4):
        self.mode = mode
        self.bounds = bounds
        self.tol = tol

    def fit(self, X, y):
        self.temperature_ = fit_temperature(X, y, mode=self.mode, bounds=self.bounds, tol=self.tol)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "temperature_"):
            raise RuntimeError("TemperatureScaler is not fitted")
        return apply_temperature(X, self.temperature_)
