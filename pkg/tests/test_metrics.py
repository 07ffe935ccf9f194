import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from smartfridge.calibration import bin_index, reliability_bins


def brute_force_report(confidences, correct, n_bins):
    """Independent oracle: group samples per bin explicitly, no shared binning code."""
    groups = {}
    for c, ok in zip(confidences, correct):
        b = n_bins - 1 if c == 1.0 else int(c * n_bins)
        b = min(b, n_bins - 1)
        groups.setdefault(b, []).append((c, ok))
    n = len(confidences)
    oce = []
    uce = []
    gaps = []
    per_bin = {}
    for b, members in groups.items():
        avg_conf = math.fsum(c for c, _ in members) / len(members)
        acc = sum(1 for _, ok in members if ok) / len(members)
        gap = avg_conf - acc
        gaps.append(abs(gap))
        w = (len(members) / n) * abs(gap)
        if gap > 0:
            oce.append(w)
        elif gap < 0:
            uce.append(w)
        per_bin[b] = (len(members), avg_conf, acc)
    oce_v = math.fsum(sorted(oce))
    uce_v = math.fsum(sorted(uce))
    return {
        "ece": oce_v + uce_v,
        "oce": oce_v,
        "uce": uce_v,
        "mce": max(gaps) if gaps else 0.0,
        "bins": per_bin,
    }


confidence_lists = st.lists(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=20
)


class TestReliabilityBins:
    def test_perfectly_confident_and_correct(self):
        report = reliability_bins([1.0] * 5, [True] * 5, 10)
        assert report.ece == 0.0
        assert report.bins[-1].count == 5
        assert report.bins[-1].avg_confidence == 1.0
        assert report.bins[-1].accuracy == 1.0

    def test_hand_case_single_bin(self):
        report = reliability_bins([0.9, 0.9], [True, False], 1)
        b = report.bins[0]
        assert b.count == 2
        assert b.avg_confidence == pytest.approx(0.9)
        assert b.accuracy == pytest.approx(0.5)
        assert report.ece == pytest.approx(0.4)
        assert report.oce == pytest.approx(0.4)
        assert report.uce == 0.0

    def test_confidence_one_lands_in_last_bin(self):
        report = reliability_bins([1.0], [True], 15)
        assert report.bins[-1].count == 1
        assert sum(b.count for b in report.bins) == 1

    def test_empty_bins_flagged_not_zero(self):
        report = reliability_bins([0.95], [True], 10)
        for b in report.bins[:-1]:
            assert b.count == 0
            assert b.avg_confidence is None
            assert b.accuracy is None
            assert b.gap is None

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            reliability_bins([], [], 10)

    def test_out_of_range_confidence_rejected(self):
        with pytest.raises(ValueError):
            reliability_bins([1.2], [True], 10)
        with pytest.raises(ValueError):
            reliability_bins([-0.1], [True], 10)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            reliability_bins([0.5], [True, False], 10)

    @given(confidence_lists, st.integers(min_value=1, max_value=4), st.randoms())
    def test_matches_brute_force_oracle(self, confs, n_bins, rnd):
        correct = [rnd.random() < 0.5 for _ in confs]
        report = reliability_bins(confs, correct, n_bins)
        oracle = brute_force_report(confs, correct, n_bins)
        assert report.ece == oracle["ece"]
        assert report.oce == oracle["oce"]
        assert report.uce == oracle["uce"]
        assert report.mce == oracle["mce"]
        for b_idx, (count, conf, acc) in oracle["bins"].items():
            b = report.bins[b_idx]
            assert b.count == count
            assert b.avg_confidence == conf
            assert b.accuracy == acc

    @given(confidence_lists, st.integers(min_value=1, max_value=15), st.randoms())
    def test_permutation_invariance(self, confs, n_bins, rnd):
        correct = [rnd.random() < 0.7 for _ in confs]
        report = reliability_bins(confs, correct, n_bins)
        paired = list(zip(confs, correct))
        rnd.shuffle(paired)
        shuffled = reliability_bins([c for c, _ in paired], [ok for _, ok in paired], n_bins)
        assert report == shuffled

    @given(confidence_lists, st.integers(min_value=1, max_value=15), st.randoms())
    def test_decomposition_and_range(self, confs, n_bins, rnd):
        correct = [rnd.random() < 0.5 for _ in confs]
        report = reliability_bins(confs, correct, n_bins)
        assert report.ece == report.oce + report.uce
        assert 0.0 <= report.ece <= 1.0
        assert 0.0 <= report.mce <= 1.0
        for b in report.bins:
            if b.count > 0:
                assert b.lo <= b.avg_confidence <= b.hi
                assert 0.0 <= b.accuracy <= 1.0

    def test_json_round_trip(self):
        report = reliability_bins([0.1, 0.6, 0.95, 1.0], [False, True, True, False], 4)
        from smartfridge.calibration import CalibrationReport

        assert CalibrationReport.from_json_dict(report.to_json_dict()) == report

    def test_table_has_one_row_per_bin(self):
        report = reliability_bins([0.1, 0.6], [False, True], 15)
        lines = report.to_table().strip().splitlines()
        assert lines[0].startswith("#")
        assert len(lines) == 16
        empty_rows = [ln for ln in lines[1:] if " 0 nan nan" in ln]
        assert len(empty_rows) == 13


class TestBinIndex:
    @pytest.mark.parametrize(
        "conf,n_bins,expected",
        [(0.0, 10, 0), (0.05, 10, 0), (0.1, 10, 1), (0.999, 10, 9), (1.0, 10, 9), (1.0, 1, 0)],
    )
    def test_edges(self, conf, n_bins, expected):
        assert bin_index(conf, n_bins) == expected
