from .dataset import (
    DEFAULT_PRIORS,
    PRODUCE_CLASSES,
    Dataset,
    DatasetSpec,
    Split,
    default_spec,
    generate_dataset,
)
from .model_io import load_model, model_from_json_dict, model_to_json_dict, save_model
from .trainer import (
    EpochRecord,
    EvalResult,
    LinearLossClassifier,
    TrainingDiverged,
    evaluate,
    train,
)

__all__ = [
    "DEFAULT_PRIORS",
    "PRODUCE_CLASSES",
    "Dataset",
    "DatasetSpec",
    "EpochRecord",
    "EvalResult",
    "LinearLossClassifier",
    "Split",
    "TrainingDiverged",
    "default_spec",
    "evaluate",
    "generate_dataset",
    "load_model",
    "model_from_json_dict",
    "model_to_json_dict",
    "save_model",
    "train",
]
