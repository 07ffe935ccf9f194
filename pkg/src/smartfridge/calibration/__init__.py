from .adafocal import AdaFocalState, adafocal_step, initial_adafocal_state
from .losses import (
    LossConfig,
    LossKind,
    bce_loss,
    bce_loss_grad,
    cross_entropy,
    focal_loss,
    focal_loss_grad,
    log_softmax,
    sigmoid,
    softmax,
)
from .metrics import CalibrationBin, CalibrationReport, bin_index, reliability_bins
from .temperature import (
    PER_CLASS,
    SCALAR,
    NotIdentifiableError,
    Temperature,
    TemperatureScaler,
    apply_temperature,
    fit_temperature,
)

__all__ = [
    "AdaFocalState",
    "CalibrationBin",
    "CalibrationReport",
    "LossConfig",
    "LossKind",
    "NotIdentifiableError",
    "PER_CLASS",
    "SCALAR",
    "Temperature",
    "TemperatureScaler",
    "adafocal_step",
    "apply_temperature",
    "bce_loss",
    "bce_loss_grad",
    "bin_index",
    "cross_entropy",
    "fit_temperature",
    "focal_loss",
    "focal_loss_grad",
    "initial_adafocal_state",
    "log_softmax",
    "reliability_bins",
    "sigmoid",
    "softmax",
]
