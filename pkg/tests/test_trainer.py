import numpy as np
import pytest

from smartfridge.calibration import (
    LossConfig,
    apply_temperature,
    fit_temperature,
    reliability_bins,
    softmax,
)
from smartfridge.training import (
    DatasetSpec,
    LinearLossClassifier,
    TrainingDiverged,
    default_spec,
    evaluate,
    generate_dataset,
    load_model,
    save_model,
    train,
)


@pytest.fixture(scope="module")
def default_dataset():
    return generate_dataset(default_spec(seed=7))


@pytest.fixture(scope="module")
def trained(default_dataset):
    return {
        kind: train(default_dataset, LossConfig(kind=kind), epochs=50, lr=0.1)
        for kind in ("bce", "focal", "adafocal")
    }


def separable_spec():
    return DatasetSpec(
        n_classes=2,
        class_priors=(0.5, 0.5),
        feature_dim=4,
        class_means=((0.0,) * 4, (6.0, 0.0, 0.0, 0.0)),
        noise_sigma=1.0,
        n_train=2000,
        n_val=500,
        n_test=2000,
        seed=5,
    )


class TestTrain:
    def test_deterministic(self, default_dataset):
        a = train(default_dataset, LossConfig(kind="focal"), epochs=10, lr=0.1)
        b = train(default_dataset, LossConfig(kind="focal"), epochs=10, lr=0.1)
        np.testing.assert_array_equal(a.weights_, b.weights_)
        assert a.curves_ == b.curves_

    def test_focal_gamma_zero_equals_cross_entropy_descent(self, default_dataset):
        """An independent plain-CE gradient descent loop must produce the same weights."""
        clf = train(default_dataset, LossConfig(kind="focal", gamma=0.0), epochs=20, lr=0.1)

        X, y = default_dataset.train.X, default_dataset.train.y
        n, d = X.shape
        k = default_dataset.spec.n_classes
        Xb = np.hstack([X, np.ones((n, 1))])
        onehot = np.zeros((n, k))
        onehot[np.arange(n), y] = 1.0
        W = np.zeros((k, d + 1))
        for _ in range(20):
            grads = softmax(Xb @ W.T) - onehot
            W = W - 0.1 * (grads.T @ Xb) / n
        np.testing.assert_array_equal(clf.weights_, W)

    def test_curve_length_matches_epochs(self, trained):
        for clf in trained.values():
            assert len(clf.curves_) == 50
            assert all(np.isfinite(r.train_loss) for r in clf.curves_)

    def test_bce_train_loss_mostly_decreasing(self, trained):
        losses = [r.train_loss for r in trained["bce"].curves_]
        decreasing = sum(1 for a, b in zip(losses, losses[1:]) if b < a)
        assert decreasing / (len(losses) - 1) >= 0.9

    def test_adafocal_gammas_within_clamp_every_epoch(self, trained):
        clf = trained["adafocal"]
        lo, hi = clf.loss_config_.gamma_clamp
        assert len(clf.gamma_history_) == 51  # initial state + one update per epoch
        for gammas in clf.gamma_history_:
            assert all(lo <= g <= hi for g in gammas)

    def test_adafocal_requires_validation_split(self, default_dataset):
        clf = LinearLossClassifier(loss="adafocal", epochs=2)
        with pytest.raises(ValueError):
            clf.fit(default_dataset.train.X, default_dataset.train.y)

    def test_divergence_raises_with_epoch(self):
        spec = DatasetSpec(
            n_classes=2,
            class_priors=(0.5, 0.5),
            feature_dim=4,
            class_means=((0.0,) * 4, (1e160, 0.0, 0.0, 0.0)),
            noise_sigma=1.0,
            n_train=64,
            n_val=32,
            n_test=32,
            seed=2,
        )
        ds = generate_dataset(spec)
        with pytest.raises(TrainingDiverged) as exc:
            train(ds, LossConfig(kind="bce"), epochs=10, lr=1.0)
        assert 0 <= exc.value.epoch < 10
        assert str(exc.value.epoch) in str(exc.value)

    def test_invalid_hyperparams(self, default_dataset):
        with pytest.raises(ValueError):
            train(default_dataset, LossConfig(kind="focal"), epochs=0)
        with pytest.raises(ValueError):
            train(default_dataset, LossConfig(kind="focal"), lr=0.0)


class TestEvaluate:
    def test_zero_weight_model_is_uniform(self, default_dataset):
        clf = LinearLossClassifier(loss="focal", n_classes=5)
        clf.fit(default_dataset.train.X[:50], default_dataset.train.y[:50])
        clf.weights_ = np.zeros_like(clf.weights_)
        ev = evaluate(clf, default_dataset.test.X, default_dataset.test.y)
        np.testing.assert_allclose(ev.probs, 0.2)
        assert ev.mean_confidence == pytest.approx(0.2)

    def test_purity(self, trained, default_dataset):
        a = evaluate(trained["focal"], default_dataset.test.X, default_dataset.test.y)
        b = evaluate(trained["focal"], default_dataset.test.X, default_dataset.test.y)
        np.testing.assert_array_equal(a.logits, b.logits)
        assert a.report == b.report

    def test_near_separable_converged_model_is_calibrated(self):
        ds = generate_dataset(separable_spec())
        clf = train(ds, LossConfig(kind="focal", gamma=0.0), epochs=200, lr=0.5)
        ev = evaluate(clf, ds.test.X, ds.test.y)
        assert ev.accuracy >= 0.95
        assert ev.report.ece <= 0.05

    def test_dimension_mismatch_rejected(self, trained):
        with pytest.raises(ValueError):
            trained["focal"].decision_function(np.zeros((3, 11)))

    def test_logits_retained_per_sample(self, trained, default_dataset):
        ev = evaluate(trained["bce"], default_dataset.test.X, default_dataset.test.y)
        assert ev.logits.shape == (len(default_dataset.test), 5)


class TestDirectionalFindings:
    """The headline comparison: focal-family models run underconfident, BCE closer to calibrated."""

    def test_focal_and_adafocal_underconfident(self, trained, default_dataset):
        for kind in ("focal", "adafocal"):
            ev = evaluate(trained[kind], default_dataset.test.X, default_dataset.test.y)
            assert ev.mean_confidence < ev.accuracy

    def test_bce_gap_smaller_than_focal(self, trained, default_dataset):
        gaps = {
            kind: abs(ev.mean_confidence - ev.accuracy)
            for kind, ev in (
                (k, evaluate(trained[k], default_dataset.test.X, default_dataset.test.y))
                for k in ("bce", "focal")
            )
        }
        assert gaps["bce"] < gaps["focal"]

    def test_temperature_scaling_rescues_focal_ece(self, trained, default_dataset):
        clf = trained["focal"]
        val = evaluate(clf, default_dataset.val.X, default_dataset.val.y)
        temp = fit_temperature(val.logits, default_dataset.val.y)
        test = evaluate(clf, default_dataset.test.X, default_dataset.test.y)
        probs = apply_temperature(test.logits, temp)
        conf = probs.max(axis=1)
        correct = probs.argmax(axis=1) == default_dataset.test.y
        after = reliability_bins(conf.tolist(), correct.tolist(), 15)
        assert after.ece <= 0.8 * test.report.ece


class TestChanceAndSeparableSpecs:
    def test_identical_means_yield_chance_accuracy(self):
        spec = DatasetSpec(
            n_classes=2,
            class_priors=(0.5, 0.5),
            feature_dim=4,
            class_means=((0.0,) * 4, (0.0,) * 4),
            noise_sigma=1.0,
            n_train=2000,
            n_val=500,
            n_test=2000,
            seed=5,
        )
        ds = generate_dataset(spec)
        clf = train(ds, LossConfig(kind="focal", gamma=0.0), epochs=30, lr=0.1)
        assert evaluate(clf, ds.test.X, ds.test.y).accuracy == pytest.approx(0.5, abs=0.05)

    def test_well_separated_means_reach_bayes_level_accuracy(self):
        ds = generate_dataset(separable_spec())
        clf = train(ds, LossConfig(kind="bce"), epochs=200, lr=0.5)
        assert evaluate(clf, ds.test.X, ds.test.y).accuracy >= 0.95


class TestModelIO:
    def test_round_trip(self, trained, default_dataset, tmp_path):
        path = tmp_path / "model.json"
        save_model(trained["adafocal"], default_dataset.spec, path)
        clf, spec = load_model(path)
        assert spec == default_dataset.spec
        np.testing.assert_array_equal(clf.weights_, trained["adafocal"].weights_)
        assert clf.loss_config_ == trained["adafocal"].loss_config_
        assert clf.gamma_history_ == trained["adafocal"].gamma_history_
        np.testing.assert_array_equal(
            clf.predict(default_dataset.test.X[:20]),
            trained["adafocal"].predict(default_dataset.test.X[:20]),
        )

    def test_save_is_byte_stable(self, trained, default_dataset, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_model(trained["focal"], default_dataset.spec, p1)
        save_model(trained["focal"], default_dataset.spec, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_unknown_version_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"formatVersion": 99}')
        with pytest.raises(ValueError):
            load_model(path)


class TestEstimatorApi:
    def test_get_set_params(self):
        clf = LinearLossClassifier(loss="bce", epochs=5)
        assert clf.get_params()["loss"] == "bce"
        clf.set_params(gamma=3.0)
        assert clf.gamma == 3.0

    def test_predict_proba_modes(self, trained, default_dataset):
        X = default_dataset.test.X[:10]
        soft = trained["focal"].predict_proba(X)
        np.testing.assert_allclose(soft.sum(axis=1), 1.0, atol=1e-9)
        sig = trained["bce"].predict_proba(X)
        assert np.all((sig > 0) & (sig < 1))
        # one-vs-rest probabilities are not constrained to a simplex
        assert not np.allclose(sig.sum(axis=1), 1.0, atol=1e-3)

    def test_unfitted_raises(self):
        with pytest.raises(RuntimeError):
            LinearLossClassifier().predict(np.zeros((2, 3)))
