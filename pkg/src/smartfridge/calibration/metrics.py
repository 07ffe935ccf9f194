"""Reliability binning and calibration error metrics (ECE/MCE/OCE/UCE).

Confidences are grouped into equal-width bins over [0, 1]; per-bin mean
confidence and accuracy feed the expected calibration error and its
over-/under-confidence decomposition. Bin averages use math.fsum, so every
report field is exactly invariant under permutation of the input samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class CalibrationBin:
    """One confidence interval [lo, hi) with its occupancy statistics.

    avg_confidence and accuracy are None for empty bins, never a silent 0.
    """

    lo: float
    hi: float
    count: int
    avg_confidence: Optional[float]
    accuracy: Optional[float]

    @property
    def gap(self) -> Optional[float]:
        """Signed confidence-accuracy gap; positive means overconfident."""
        if self.count == 0:
            return None
        return self.avg_confidence - self.accuracy


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[CalibrationBin, ...]
    ece: float
    mce: float
    oce: float
    uce: float
    n_samples: int

    def to_json_dict(self) -> dict:
        return {
            "nBins": len(self.bins),
            "nSamples": self.n_samples,
            "ece": self.ece,
            "mce": self.mce,
            "oce": self.oce,
            "uce": self.uce,
            "bins": [
                {
                    "lo": b.lo,
                    "hi": b.hi,
                    "count": b.count,
                    "avgConfidence": b.avg_confidence,
                    "accuracy": b.accuracy,
                }
                for b in self.bins
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CalibrationReport":
        bins = tuple(
            CalibrationBin(
                lo=b["lo"],
                hi=b["hi"],
                count=b["count"],
                avg_confidence=b["avgConfidence"],
                accuracy=b["accuracy"],
            )
            for b in d["bins"]
        )
        return cls(
            bins=bins,
            ece=d["ece"],
            mce=d["mce"],
            oce=d["oce"],
            uce=d["uce"],
            n_samples=d["nSamples"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        """Line-oriented text table, one bin per row: lo hi count conf acc."""
        lines = ["# lo hi count avg_confidence accuracy"]
        for b in self.bins:
            conf = "nan" if b.avg_confidence is None else f"{b.avg_confidence:.6f}"
            acc = "nan" if b.accuracy is None else f"{b.accuracy:.6f}"
            lines.append(f"{b.lo:.6f} {b.hi:.6f} {b.count} {conf} {acc}")
        return "\n".join(lines) + "\n"


def bin_index(confidence: float, n_bins: int) -> int:
    """Equal-width bin index; a confidence of exactly 1.0 lands in the last bin."""
    if not 0.0 <= confidence <= 1.0:
        raise ValueError(f"confidence {confidence!r} outside [0, 1]")
    return min(int(confidence * n_bins), n_bins - 1)


def reliability_bins(
    confidences: Sequence[float], correct: Sequence[bool], n_bins: int = 15
) -> CalibrationReport:
    """Bin predictions by confidence and compute calibration errors.

    ECE is the count-weighted mean absolute per-bin gap, reported as the exact
    sum of its one-signed components (ece == oce + uce by construction); empty
    bins are excluded rather than counted as zero-gap.
    """
    confs = [float(c) for c in confidences]
    hits = [bool(c) for c in correct]
    if len(confs) == 0:
        raise ValueError("reliability_bins needs at least one prediction")
    if len(confs) != len(hits):
        raise ValueError("confidences and correct must have equal length")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")

    per_bin_conf: list[list[float]] = [[] for _ in range(n_bins)]
    per_bin_hits: list[int] = [0] * n_bins
    for c, h in zip(confs, hits):
        b = bin_index(c, n_bins)
        per_bin_conf[b].append(c)
        per_bin_hits[b] += int(h)

    n = len(confs)
    bins: list[CalibrationBin] = []
    over: list[float] = []
    under: list[float] = []
    gaps: list[float] = []
    for b in range(n_bins):
        lo, hi = b / n_bins, (b + 1) / n_bins
        count = len(per_bin_conf[b])
        if count == 0:
            bins.append(CalibrationBin(lo, hi, 0, None, None))
            continue
        avg_conf = math.fsum(per_bin_conf[b]) / count
        acc = per_bin_hits[b] / count
        bins.append(CalibrationBin(lo, hi, count, avg_conf, acc))
        gap = avg_conf - acc
        weighted = (count / n) * abs(gap)
        gaps.append(abs(gap))
        if gap > 0:
            over.append(weighted)
        elif gap < 0:
            under.append(weighted)

    oce = math.fsum(over)
    uce = math.fsum(under)
    return CalibrationReport(
        bins=tuple(bins),
        ece=oce + uce,
        mce=max(gaps) if gaps else 0.0,
        oce=oce,
        uce=uce,
        n_samples=n,
    )
