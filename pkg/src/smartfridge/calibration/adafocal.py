"""Per-bin adaptive update of the focusing parameter.

Each confidence bin b carries its own gamma, multiplied once per epoch by
exp(lambda * (C_b - A_b)) where C_b and A_b are the bin's validation mean
confidence and accuracy. Overconfident bins (C > A) get a larger gamma,
underconfident bins a smaller one; empty bins keep theirs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .metrics import CalibrationReport


@dataclass(frozen=True)
class AdaFocalState:
    """Epoch counter plus one focusing parameter per confidence bin."""

    t: int
    gammas: tuple[float, ...]
    lambda_: float = 1.0
    clamp: tuple[float, float] = (0.0, 20.0)

    def __post_init__(self) -> None:
        lo, hi = self.clamp
        if not lo <= hi:
            raise ValueError(f"clamp must satisfy low <= high, got {self.clamp}")
        if not self.lambda_ > 0:
            raise ValueError(f"lambda_ must be > 0, got {self.lambda_}")
        for g in self.gammas:
            if not lo <= g <= hi:
                raise ValueError(f"gamma {g} outside clamp {self.clamp}")


def initial_adafocal_state(
    n_bins: int,
    gamma0: float = 2.0,
    lambda_: float = 1.0,
    clamp: tuple[float, float] = (0.0, 20.0),
) -> AdaFocalState:
    return AdaFocalState(t=0, gammas=(gamma0,) * n_bins, lambda_=lambda_, clamp=clamp)


def adafocal_step(state: AdaFocalState, val_report: CalibrationReport) -> AdaFocalState:
    """One multiplicative gamma update from a validation reliability report."""
    if len(state.gammas) != len(val_report.bins):
        raise ValueError(
            f"state has {len(state.gammas)} bins but report has {len(val_report.bins)}"
        )
    lo, hi = state.clamp
    new_gammas = []
    for g, b in zip(state.gammas, val_report.bins):
        if b.count == 0:
            new_gammas.append(g)
        else:
            updated = g * math.exp(state.lambda_ * (b.avg_confidence - b.accuracy))
            new_gammas.append(min(max(updated, lo), hi))
    return AdaFocalState(
        t=state.t + 1, gammas=tuple(new_gammas), lambda_=state.lambda_, clamp=state.clamp
    )
