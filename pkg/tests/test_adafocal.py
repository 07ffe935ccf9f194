import math

import pytest

from smartfridge.calibration import (
    AdaFocalState,
    CalibrationBin,
    CalibrationReport,
    adafocal_step,
    initial_adafocal_state,
    reliability_bins,
)


def report_from_gaps(gaps, counts=None):
    """Build a synthetic report with chosen per-bin confidence-accuracy gaps."""
    n = len(gaps)
    bins = []
    total = 0
    for i, gap in enumerate(gaps):
        lo, hi = i / n, (i + 1) / n
        if gap is None:
            bins.append(CalibrationBin(lo, hi, 0, None, None))
        else:
            count = 10 if counts is None else counts[i]
            total += count
            acc = 0.5
            bins.append(CalibrationBin(lo, hi, count, acc + gap, acc))
    return CalibrationReport(
        bins=tuple(bins), ece=0.0, mce=0.0, oce=0.0, uce=0.0, n_samples=max(total, 1)
    )


class TestAdaFocalStep:
    def test_hand_value(self):
        state = AdaFocalState(t=0, gammas=(2.0,), lambda_=1.0, clamp=(0.0, 20.0))
        new = adafocal_step(state, report_from_gaps([0.1]))
        assert new.gammas[0] == pytest.approx(2.0 * math.exp(0.1), abs=1e-12)
        assert new.gammas[0] == pytest.approx(2.210342, abs=1e-6)
        assert new.t == 1

    def test_calibrated_bin_is_identity(self):
        state = initial_adafocal_state(3, gamma0=2.0)
        new = adafocal_step(state, report_from_gaps([0.0, 0.0, 0.0]))
        assert new.gammas == state.gammas

    def test_clamped_at_upper_bound(self):
        state = AdaFocalState(t=4, gammas=(19.0,), lambda_=1.0, clamp=(0.0, 20.0))
        new = adafocal_step(state, report_from_gaps([0.5]))
        # 19 * e^0.5 = 31.33 before clamping
        assert new.gammas[0] == 20.0

    def test_empty_bins_keep_gamma(self):
        state = initial_adafocal_state(3, gamma0=2.0)
        new = adafocal_step(state, report_from_gaps([None, 0.2, None]))
        assert new.gammas[0] == 2.0
        assert new.gammas[2] == 2.0
        assert new.gammas[1] == pytest.approx(2.0 * math.exp(0.2))

    def test_underconfident_bin_shrinks_gamma(self):
        state = initial_adafocal_state(1, gamma0=2.0)
        new = adafocal_step(state, report_from_gaps([-0.3]))
        assert new.gammas[0] < 2.0

    def test_bin_count_mismatch_rejected(self):
        state = initial_adafocal_state(4)
        with pytest.raises(ValueError):
            adafocal_step(state, report_from_gaps([0.1, 0.1]))

    def test_identity_on_real_perfectly_calibrated_report(self):
        # all-confidence-1.0 correct predictions: C == A in the last bin
        report = reliability_bins([1.0] * 8, [True] * 8, 5)
        state = initial_adafocal_state(5)
        assert adafocal_step(state, report).gammas == state.gammas

    def test_gammas_stay_within_clamp_after_many_steps(self):
        state = initial_adafocal_state(2, gamma0=2.0, clamp=(0.5, 8.0))
        for _ in range(50):
            state = adafocal_step(state, report_from_gaps([0.4, -0.4]))
            lo, hi = state.clamp
            assert all(lo <= g <= hi for g in state.gammas)
        assert state.gammas[0] == 8.0
        assert state.gammas[1] == 0.5

    def test_invalid_state_rejected(self):
        with pytest.raises(ValueError):
            AdaFocalState(t=0, gammas=(25.0,), lambda_=1.0, clamp=(0.0, 20.0))
        with pytest.raises(ValueError):
            AdaFocalState(t=0, gammas=(1.0,), lambda_=-1.0, clamp=(0.0, 20.0))
