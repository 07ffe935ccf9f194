import numpy as np
import pytest

from smartfridge.training import (
    DEFAULT_PRIORS,
    PRODUCE_CLASSES,
    DatasetSpec,
    default_spec,
    generate_dataset,
)


def two_class_spec(**overrides):
    base = dict(
        n_classes=2,
        class_priors=(0.5, 0.5),
        feature_dim=4,
        class_means=((0.0,) * 4, (3.0, 0.0, 0.0, 0.0)),
        noise_sigma=1.0,
        n_train=500,
        n_val=200,
        n_test=500,
        seed=3,
    )
    base.update(overrides)
    return DatasetSpec(**base)


class TestDatasetSpec:
    def test_default_spec_is_imbalanced(self):
        spec = default_spec()
        assert spec.class_priors == DEFAULT_PRIORS
        assert spec.class_names == PRODUCE_CLASSES
        assert min(spec.class_priors) <= max(spec.class_priors) / 2

    def test_priors_must_sum_to_one(self):
        with pytest.raises(ValueError):
            two_class_spec(class_priors=(0.5, 0.6))

    def test_negative_priors_rejected(self):
        with pytest.raises(ValueError):
            two_class_spec(class_priors=(1.5, -0.5))

    def test_mean_shape_checked(self):
        with pytest.raises(ValueError):
            two_class_spec(class_means=((0.0,) * 3, (1.0,) * 3))

    def test_noise_sigma_positive(self):
        with pytest.raises(ValueError):
            two_class_spec(noise_sigma=0.0)

    def test_json_round_trip(self):
        spec = default_spec(seed=13)
        assert DatasetSpec.from_json_dict(spec.to_json_dict()) == spec


class TestGenerateDataset:
    def test_deterministic_per_seed(self):
        spec = default_spec(seed=21)
        a = generate_dataset(spec)
        b = generate_dataset(spec)
        np.testing.assert_array_equal(a.train.X, b.train.X)
        np.testing.assert_array_equal(a.train.y, b.train.y)
        np.testing.assert_array_equal(a.test.X, b.test.X)
        np.testing.assert_array_equal(a.val.y, b.val.y)

    def test_different_seeds_differ(self):
        a = generate_dataset(default_spec(seed=1))
        b = generate_dataset(default_spec(seed=2))
        assert not np.array_equal(a.train.X, b.train.X)

    def test_split_sizes(self):
        ds = generate_dataset(default_spec(seed=3, n_train=100, n_val=50, n_test=75))
        assert len(ds.train) == 100
        assert len(ds.val) == 50
        assert len(ds.test) == 75

    def test_class_frequencies_near_priors(self):
        # multinomial: |count - n p| <= 3 sqrt(n p (1-p)) per class
        spec = default_spec(seed=9, n_train=8000)
        ds = generate_dataset(spec)
        n = len(ds.train)
        for c, p in enumerate(spec.class_priors):
            count = int((ds.train.y == c).sum())
            assert abs(count - n * p) <= 3 * np.sqrt(n * p * (1 - p))

    def test_features_center_on_class_means(self):
        spec = two_class_spec(n_train=4000)
        ds = generate_dataset(spec)
        for c in range(2):
            centroid = ds.train.X[ds.train.y == c].mean(axis=0)
            np.testing.assert_allclose(centroid, spec.class_means[c], atol=0.15)
