"""Synthetic class-imbalanced Gaussian-mixture datasets.

Stands in for labeled produce images: each class is an isotropic Gaussian blob
in feature space, with priors skewed so the rare classes that motivate the
focal loss actually are rare. Everything is deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRODUCE_CLASSES = ("Purple Sweet Potato", "Water Spinach", "Apple", "Beetroot", "Spinach")
DEFAULT_PRIORS = (0.40, 0.25, 0.20, 0.10, 0.05)


@dataclass(frozen=True)
class DatasetSpec:
    n_classes: int
    class_priors: tuple[float, ...]
    feature_dim: int
    class_means: tuple[tuple[float, ...], ...]
    noise_sigma: float
    n_train: int
    n_val: int
    n_test: int
    seed: int
    class_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.feature_dim < 2:
            raise ValueError("need at least 2 features")
        if len(self.class_priors) != self.n_classes:
            raise ValueError("class_priors length must equal n_classes")
        if any(p < 0 for p in self.class_priors):
            raise ValueError("priors must be nonnegative")
        if abs(sum(self.class_priors) - 1.0) > 1e-9:
            raise ValueError(f"priors must sum to 1, got {sum(self.class_priors)}")
        if len(self.class_means) != self.n_classes or any(
            len(m) != self.feature_dim for m in self.class_means
        ):
            raise ValueError("class_means must have shape (n_classes, feature_dim)")
        if not self.noise_sigma > 0:
            raise ValueError("noise_sigma must be > 0")
        if min(self.n_train, self.n_val, self.n_test) < 1:
            raise ValueError("all split sizes must be >= 1")
        if not self.class_names:
            object.__setattr__(
                self, "class_names", tuple(f"class-{i}" for i in range(self.n_classes))
            )
        elif len(self.class_names) != self.n_classes:
            raise ValueError("class_names length must equal n_classes")

    @property
    def means_array(self) -> np.ndarray:
        return np.asarray(self.class_means, dtype=np.float64)

    def to_json_dict(self) -> dict:
        return {
            "nClasses": self.n_classes,
            "classPriors": list(self.class_priors),
            "featureDim": self.feature_dim,
            "classMeans": [list(m) for m in self.class_means],
            "noiseSigma": self.noise_sigma,
            "nTrain": self.n_train,
            "nVal": self.n_val,
            "nTest": self.n_test,
            "seed": self.seed,
            "classNames": list(self.class_names),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DatasetSpec":
        return cls(
            n_classes=d["nClasses"],
            class_priors=tuple(d["classPriors"]),
            feature_dim=d["featureDim"],
            class_means=tuple(tuple(m) for m in d["classMeans"]),
            noise_sigma=d["noiseSigma"],
            n_train=d["nTrain"],
            n_val=d["nVal"],
            n_test=d["nTest"],
            seed=d["seed"],
            class_names=tuple(d["classNames"]),
        )


@dataclass(frozen=True)
class Split:
    X: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class Dataset:
    spec: DatasetSpec
    train: Split = field(repr=False)
    val: Split = field(repr=False)
    test: Split = field(repr=False)


def default_spec(
    seed: int = 7,
    n_train: int = 4000,
    n_val: int = 2000,
    n_test: int = 4000,
    mean_spread: float = 1.1,
    noise_sigma: float = 1.0,
) -> DatasetSpec:
    """Imbalanced 5-class produce spec with class means drawn once from the seed."""
    rng = np.random.default_rng(seed)
    k, d = len(PRODUCE_CLASSES), 8
    means = rng.normal(0.0, mean_spread, size=(k, d))
    return DatasetSpec(
        n_classes=k,
        class_priors=DEFAULT_PRIORS,
        feature_dim=d,
        class_means=tuple(tuple(float(v) for v in row) for row in means),
        noise_sigma=noise_sigma,
        n_train=n_train,
        n_val=n_val,
        n_test=n_test,
        seed=seed,
        class_names=PRODUCE_CLASSES,
    )


def _sample_split(spec: DatasetSpec, rng: np.random.Generator, n: int) -> Split:
    labels = rng.choice(spec.n_classes, size=n, p=np.asarray(spec.class_priors))
    noise = rng.standard_normal((n, spec.feature_dim))
    X = spec.means_array[labels] + spec.noise_sigma * noise
    return Split(X=X, y=labels.astype(np.int64))


def generate_dataset(spec: DatasetSpec) -> Dataset:
    """Draw train/val/test splits; a given spec always yields identical arrays."""
    rng = np.random.default_rng(spec.seed)
    train = _sample_split(spec, rng, spec.n_train)
    val = _sample_split(spec, rng, spec.n_val)
    test = _sample_split(spec, rng, spec.n_test)
    return Dataset(spec=spec, train=train, val=val, test=test)
