"""Tone curve design for raising shadows without touching highlights.

The threshold picks where "shadow" ends. Below it, a gamma-style curve
driven by the weighted histogram brightens pixels; at and above it, the
curve is the identity, so bright content passes through unchanged.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .noise import HIST_BINS


@dataclass(frozen=True)
class ThresholdReport:
    """Shadow threshold on the 8-bit code scale plus its ingredients."""

    threshold_bin: int
    percentile_value: float
    bright_count: int


@dataclass(frozen=True)
class MappingCurve:
    """256-entry lookup table mapping input code i to an output in [0, 1].

    Identity from threshold_bin upward; non-decreasing everywhere; never
    below the identity line in the shadow range.
    """

    lut: np.ndarray
    threshold_bin: int
    alpha: float


def compute_threshold(values: np.ndarray, percentile: float = 75.0) -> ThresholdReport:
    """Derive the shadow/highlight split point from the bright tail.

    The pixels strictly between the given percentile and the maximum (on
    the 8-bit code scale) form the bright set; the threshold is 255 minus
    their mean code, rounded. An empty bright set, as on constant images,
    yields 255 so that everything counts as shadow.
    """
    if not 0.0 < percentile < 100.0:
        raise InvalidInputError(f"percentile must be in (0, 100), got {percentile}")
    codes = np.asarray(values, dtype=np.float64) * 255.0
    if codes.size == 0:
        raise InvalidInputError("cannot compute a threshold of an empty plane")
    cut = float(np.percentile(codes, percentile))
    bright = codes[(codes > cut) & (codes < codes.max())]
    if bright.size == 0:
        return ThresholdReport(threshold_bin=255, percentile_value=cut, bright_count=0)
    threshold = int(np.rint(255.0 - float(bright.mean())))
    threshold = min(max(threshold, 1), 255)
    return ThresholdReport(
        threshold_bin=threshold, percentile_value=cut, bright_count=int(bright.size)
    )


def design_agcwd(counts: np.ndarray, threshold_bin: int, alpha: float = 0.5) -> MappingCurve:
    """Build the shadow-range gamma curve from histogram counts.

    The sub-threshold histogram is normalized, compressed by the alpha
    power between its own min and max, and turned into a cumulative weight
    that bends a per-code gamma exponent: heavily populated codes get
    lifted more. Degenerate histograms (empty, or all bins equal) reduce
    to uniform weights.

    Args:
        counts: length-256 histogram; only bins below threshold_bin are
            consulted.
        threshold_bin: first code mapped by the identity.
        alpha: compression strength in [0, 1].

    Returns:
        MappingCurve whose lut is non-decreasing, anchored at lut[0] = 0,
        identity for codes >= threshold_bin.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape != (HIST_BINS,):
        raise InvalidInputError(f"counts must have shape (256,), got {counts.shape}")
    if not 0 < threshold_bin <= 255:
        raise InvalidInputError(f"threshold_bin must be in (0, 255], got {threshold_bin}")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must be in [0, 1], got {alpha}")

    t = threshold_bin
    sub = counts[:t]
    total = sub.sum()
    pdf = sub / total if total > 0 else np.zeros(t)
    lo, hi = pdf.min(), pdf.max()
    if hi > lo:
        weighted = hi * ((pdf - lo) / (hi - lo)) ** alpha
    else:
        weighted = np.ones(t)
    # Cumulative mass strictly below each code: exponent 1 at code 0, so
    # the curve is anchored at zero and never dips below the identity.
    below = np.concatenate(([0.0], np.cumsum(weighted)[:-1]))
    cdf = below / weighted.sum()

    lut = np.arange(HIST_BINS, dtype=np.float64) / 255.0
    codes = np.arange(t, dtype=np.float64)
    lut[:t] = (t / 255.0) * (codes / t) ** (1.0 - cdf)
    lut = np.maximum.accumulate(np.clip(lut, 0.0, 1.0))
    return MappingCurve(lut=lut, threshold_bin=t, alpha=alpha)


def apply_curve(values: np.ndarray, curve: MappingCurve) -> np.ndarray:
    """Map a [0, 1] plane through the curve.

    The lut is sampled on the code grid i / 255 and interpolated linearly
    in between, so 8-bit-quantized inputs hit table entries exactly.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise InvalidInputError("values must lie in [0, 1]")
    grid = np.arange(HIST_BINS, dtype=np.float64) / 255.0
    return np.interp(values, grid, curve.lut)


def export_curve(curve: MappingCurve, path) -> None:
    """Write the curve as 256 CSV rows of input code and 8-bit output level."""
    path = Path(path)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for code, value in enumerate(curve.lut):
            writer.writerow([code, format(value * 255.0, ".10g")])
