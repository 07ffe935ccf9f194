import numpy as np
import pytest

from smartfridge.calibration import (
    PER_CLASS,
    NotIdentifiableError,
    Temperature,
    TemperatureScaler,
    apply_temperature,
    fit_temperature,
    softmax,
)


def calibrated_logits(n, k, seed, spread=3.0):
    """Logits whose softmax IS the label posterior: labels drawn from softmax(z)."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, k)) * spread
    p = softmax(z)
    u = rng.random(n)
    labels = (p.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return z, labels


def grid_search_temperature(z, labels, grid):
    """Independent oracle: dense grid over T, pick the NLL minimizer."""
    best_t, best_nll = None, np.inf
    rows = np.arange(len(labels))
    for t in grid:
        s = z / t
        s = s - s.max(axis=1, keepdims=True)
        nll = float(np.mean(np.log(np.exp(s).sum(axis=1)) - s[rows, labels]))
        if nll < best_nll:
            best_t, best_nll = t, nll
    return best_t


class TestApplyTemperature:
    def test_identity_at_one(self):
        t = Temperature(mode="scalar", values=(1.0,))
        np.testing.assert_array_equal(apply_temperature([2.0, 0.0], t), softmax([2.0, 0.0]))

    def test_hand_value_t_two(self):
        t = Temperature(mode="scalar", values=(2.0,))
        np.testing.assert_allclose(
            apply_temperature([2.0, 0.0], t), [0.731059, 0.268941], atol=1e-6
        )

    def test_infinite_temperature_limit_is_uniform(self):
        t = Temperature(mode="scalar", values=(1e9,))
        np.testing.assert_allclose(apply_temperature([2.0, 0.0], t), [0.5, 0.5], atol=1e-6)

    def test_scalar_preserves_argmax(self):
        rng = np.random.default_rng(5)
        z = rng.normal(size=(200, 6)) * 4
        for t_val in [0.05, 0.3, 1.0, 2.5, 19.0]:
            t = Temperature(mode="scalar", values=(t_val,))
            probs = apply_temperature(z, t)
            np.testing.assert_array_equal(np.argmax(probs, axis=1), np.argmax(z, axis=1))

    def test_invalid_temperature_rejected(self):
        with pytest.raises(ValueError):
            Temperature(mode="scalar", values=(0.0,))
        with pytest.raises(ValueError):
            Temperature(mode="scalar", values=(-1.0,))
        with pytest.raises(ValueError):
            Temperature(mode="scalar", values=(np.inf,))


class TestFitTemperature:
    def test_recovers_unit_temperature(self):
        z, labels = calibrated_logits(10_000, 5, seed=1)
        t = fit_temperature(z, labels)
        oracle = grid_search_temperature(z, labels, np.linspace(0.5, 2.0, 151))
        assert 0.9 <= t.values[0] <= 1.1
        assert abs(t.values[0] - oracle) < 0.02

    def test_recovers_temperature_three(self):
        z, labels = calibrated_logits(10_000, 5, seed=2)
        t = fit_temperature(z * 3.0, labels)
        oracle = grid_search_temperature(z * 3.0, labels, np.linspace(2.0, 4.5, 251))
        assert 2.85 <= t.values[0] <= 3.15
        assert abs(t.values[0] - oracle) < 0.02

    def test_single_class_labels_not_identifiable(self):
        rng = np.random.default_rng(3)
        z = rng.normal(size=(50, 3))
        with pytest.raises(NotIdentifiableError):
            fit_temperature(z, np.zeros(50, dtype=int))

    def test_fewer_samples_than_classes_rejected(self):
        with pytest.raises(ValueError):
            fit_temperature(np.zeros((2, 4)), [0, 1])

    def test_per_class_mode_recovers_anisotropic_scaling(self):
        z, labels = calibrated_logits(8_000, 3, seed=4)
        scales = np.array([1.0, 2.0, 4.0])
        t = fit_temperature(z * scales, labels, mode=PER_CLASS)
        assert t.mode == PER_CLASS
        # each class logit was multiplied by its scale; fitted values track them
        for fitted, true in zip(t.values, scales):
            assert true * 0.7 <= fitted <= true * 1.4

    def test_improves_nll_of_miscalibrated_logits(self):
        z, labels = calibrated_logits(4_000, 4, seed=6)
        sharpened = z * 2.5
        t = fit_temperature(sharpened, labels)
        before = apply_temperature(sharpened, Temperature(mode="scalar", values=(1.0,)))
        after = apply_temperature(sharpened, t)
        rows = np.arange(len(labels))
        nll_before = -np.mean(np.log(before[rows, labels]))
        nll_after = -np.mean(np.log(after[rows, labels]))
        assert nll_after < nll_before


class TestTemperatureScalerEstimator:
    def test_fit_transform_round_trip(self):
        z, labels = calibrated_logits(3_000, 4, seed=9)
        scaler = TemperatureScaler().fit(z * 2.0, labels)
        probs = scaler.transform(z * 2.0)
        assert probs.shape == (3_000, 4)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert 1.7 <= scaler.temperature_.values[0] <= 2.3

    def test_unfitted_transform_raises(self):
        with pytest.raises(RuntimeError):
            TemperatureScaler().transform(np.zeros((2, 3)))

    def test_get_params(self):
        scaler = TemperatureScaler(mode="per_class", tol=1e-3)
        params = scaler.get_params()
        assert params["mode"] == "per_class"
        assert params["tol"] == 1e-3
