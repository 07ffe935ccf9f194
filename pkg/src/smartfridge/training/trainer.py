"""Linear softmax/sigmoid classifier trained by full-batch gradient descent.

The smallest trainer that exhibits the calibration behaviour of the three loss
formulations: focal and its per-bin adaptive variant act on softmax
probabilities, BCE trains independent one-vs-rest sigmoid heads. Training is
deterministic: (data, loss config, epochs, lr) fully determine the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_X_y

from ..calibration import (
    CalibrationReport,
    LossConfig,
    LossKind,
    adafocal_step,
    bce_loss,
    bce_loss_grad,
    focal_loss,
    focal_loss_grad,
    initial_adafocal_state,
    reliability_bins,
    sigmoid,
    softmax,
)
from .dataset import Dataset


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: Optional[float]
    val_accuracy: Optional[float]
    val_ece: Optional[float]


@dataclass(frozen=True)
class EvalResult:
    logits: np.ndarray
    probs: np.ndarray
    accuracy: float
    mean_confidence: float
    report: CalibrationReport


class LinearLossClassifier(BaseEstimator, ClassifierMixin):
    """Linear classifier with a bias column, trained under a selectable loss.

    Parameters mirror LossConfig: `loss` picks the formulation, `gamma` is the
    focal focusing parameter, `lambda_`/`gamma_clamp`/`n_bins` drive the
    adaptive variant. The adaptive loss needs a validation split passed to
    fit(); it re-bins validation confidence after every epoch and updates the
    per-bin gammas multiplicatively.
    """

    def __init__(
        self,
        loss: str = "focal",
        gamma: float = 2.0,
        lambda_: float = 1.0,
        n_bins: int = 15,
        gamma_clamp: tuple[float, float] = (0.0, 20.0),
        epochs: int = 50,
        lr: float = 0.1,
        n_classes: Optional[int] = None,
    ):
        self.loss = loss
        self.gamma = gamma
        self.lambda_ = lambda_
        self.n_bins = n_bins
        self.gamma_clamp = gamma_clamp
        self.epochs = epochs
        self.lr = lr
        self.n_classes = n_classes

    def _loss_config(self) -> LossConfig:
        return LossConfig(
            kind=LossKind(self.loss),
            gamma=self.gamma,
            lambda_=self.lambda_,
            n_bins=self.n_bins,
            gamma_clamp=self.gamma_clamp,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        config = self._loss_config()
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        X, y = check_X_y(X, y, dtype=np.float64)
        y = y.astype(np.int64)
        k = self.n_classes if self.n_classes is not None else int(y.max()) + 1
        n, d = X.shape
        have_val = X_val is not None and y_val is not None
        if config.kind is LossKind.ADAFOCAL and not have_val:
            raise ValueError("the adaptive focal loss requires a validation split")

        Xb = np.hstack([X, np.ones((n, 1))])
        if have_val:
            X_val = check_array(X_val, dtype=np.float64)
            y_val = np.asarray(y_val, dtype=np.int64)
            Xb_val = np.hstack([X_val, np.ones((len(X_val), 1))])

        W = np.zeros((k, d + 1))
        rows = np.arange(n)
        state = None
        gamma_history: list[tuple[float, ...]] = []
        if config.kind is LossKind.ADAFOCAL:
            state = initial_adafocal_state(
                config.n_bins, gamma0=self.gamma, lambda_=config.lambda_, clamp=config.gamma_clamp
            )
            gamma_history.append(state.gammas)

        curves: list[EpochRecord] = []
        for epoch in range(self.epochs):
            with np.errstate(over="ignore"):  # divergence is detected, not warned about
                Z = Xb @ W.T
            if not np.all(np.isfinite(Z)):
                raise TrainingDiverged(epoch)
            if config.kind is LossKind.BCE:
                losses = bce_loss(Z, y)
                grads = bce_loss_grad(Z, y)
            elif config.kind is LossKind.FOCAL:
                losses = focal_loss(Z, y, config.gamma)
                grads = focal_loss_grad(Z, y, config.gamma)
            else:
                q_true = softmax(Z)[rows, y]
                sample_gammas = self._gammas_for(q_true, state)
                losses = focal_loss(Z, y, sample_gammas)
                grads = focal_loss_grad(Z, y, sample_gammas)

            train_loss = float(losses.mean())
            if not np.isfinite(train_loss):
                raise TrainingDiverged(epoch)
            W = W - self.lr * (grads.T @ Xb) / n

            val_loss = val_acc = val_ece = None
            if have_val:
                val_report, val_loss, val_acc = self._validation_metrics(
                    Xb_val, y_val, W, config, state, epoch
                )
                val_ece = val_report.ece
                if config.kind is LossKind.ADAFOCAL:
                    state = adafocal_step(state, val_report)
                    gamma_history.append(state.gammas)
            curves.append(EpochRecord(epoch, train_loss, val_loss, val_acc, val_ece))

        self.weights_ = W
        self.n_classes_ = k
        self.classes_ = np.arange(k)
        self.n_features_in_ = d
        self.loss_config_ = config
        self.curves_ = curves
        self.gamma_history_ = gamma_history if gamma_history else None
        return self

    def _gammas_for(self, q_true: np.ndarray, state) -> np.ndarray:
        idx = np.minimum((q_true * len(state.gammas)).astype(np.int64), len(state.gammas) - 1)
        return np.asarray(state.gammas)[idx]

    def _validation_metrics(self, Xb_val, y_val, W, config, state, epoch):
        with np.errstate(over="ignore"):
            Z = Xb_val @ W.T
        if not np.all(np.isfinite(Z)):
            raise TrainingDiverged(epoch)
        probs = self._probs_from_logits(Z)
        conf = probs.max(axis=1)
        correct = probs.argmax(axis=1) == y_val
        report = reliability_bins(conf.tolist(), correct.tolist(), config.n_bins)
        if config.kind is LossKind.BCE:
            loss = float(bce_loss(Z, y_val).mean())
        elif config.kind is LossKind.FOCAL:
            loss = float(focal_loss(Z, y_val, config.gamma).mean())
        else:
            q_true = softmax(Z)[np.arange(len(y_val)), y_val]
            loss = float(focal_loss(Z, y_val, self._gammas_for(q_true, state)).mean())
        return report, loss, float(correct.mean())

    def _probs_from_logits(self, Z: np.ndarray) -> np.ndarray:
        if LossKind(self.loss) is LossKind.BCE:
            return sigmoid(Z)
        return softmax(Z)

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features but the model was trained on {self.n_features_in_}"
            )
        return np.hstack([X, np.ones((len(X), 1))]) @ self.weights_.T

    def predict_proba(self, X) -> np.ndarray:
        return self._probs_from_logits(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)

    def _check_fitted(self) -> None:
        if not hasattr(self, "weights_"):
            raise RuntimeError("classifier is not fitted")


def train(
    dataset: Dataset, loss_config: LossConfig, epochs: int = 50, lr: float = 0.1
) -> LinearLossClassifier:
    """Fit a LinearLossClassifier on the dataset's train split, validating on val."""
    clf = LinearLossClassifier(
        loss=loss_config.kind.value,
        gamma=loss_config.gamma,
        lambda_=loss_config.lambda_,
        n_bins=loss_config.n_bins,
        gamma_clamp=loss_config.gamma_clamp,
        epochs=epochs,
        lr=lr,
        n_classes=dataset.spec.n_classes,
    )
    return clf.fit(
        dataset.train.X, dataset.train.y, X_val=dataset.val.X, y_val=dataset.val.y
    )


def evaluate(clf: LinearLossClassifier, X, y, n_bins: int = 15) -> EvalResult:
    """Per-sample logits plus accuracy and a reliability report for one split."""
    logits = clf.decision_function(X)
    probs = clf._probs_from_logits(logits)
    y = np.asarray(y, dtype=np.int64)
    conf = probs.max(axis=1)
    correct = probs.argmax(axis=1) == y
    report = reliability_bins(conf.tolist(), correct.tolist(), n_bins)
    return EvalResult(
        logits=logits,
        probs=probs,
        accuracy=float(correct.mean()),
        mean_confidence=float(conf.mean()),
        report=report,
    )
