"""Signal-dependent noise floor and the histogram gated by it.

Dark-region histogram statistics drive the tone curve, so pixels whose
local contrast is indistinguishable from sensor noise are left out: they
would otherwise let noise grain steer the enhancement.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .image import gaussian_blur

HIST_BINS = 256


@dataclass(frozen=True)
class NoiseLevelFunction:
    """Noise standard deviation as a function of intensity.

    Affine variance model: sigma(I) = sqrt(a * I + b) on the [0, 1]
    intensity scale. Coefficients come from calibration or defaults;
    estimation is out of scope here.
    """

    a: float = 0.01
    b: float = 0.0004

    def __post_init__(self):
        if self.a < 0.0 or self.b < 0.0:
            raise InvalidInputError(
                f"noise coefficients must be >= 0, got a={self.a}, b={self.b}"
            )

    def level(self, intensity: np.ndarray) -> np.ndarray:
        return np.sqrt(self.a * np.asarray(intensity, dtype=np.float64) + self.b)


@dataclass(frozen=True)
class NoiseAwareHistogram:
    """Per-bin counts of the gated dark pixels.

    counts has one entry per 8-bit code; selected is the number of pixels
    that passed both the contrast gate and the threshold cut, excluded the
    sub-threshold pixels rejected by the gate. When the gate rejects
    everything, counts falls back to the plain sub-threshold histogram and
    used_fallback is set.
    """

    counts: np.ndarray
    threshold_bin: int
    selected: int
    excluded: int
    used_fallback: bool = False

    @property
    def pdf(self) -> np.ndarray:
        """Counts normalized to probabilities; all zeros when empty."""
        total = self.counts.sum()
        if total == 0:
            return np.zeros(HIST_BINS, dtype=np.float64)
        return self.counts / float(total)


def intensity_bin(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] samples to 8-bit histogram bins: min(floor(v * 256), 255)."""
    bins = (np.asarray(values, dtype=np.float64) * HIST_BINS).astype(np.intp)
    return np.minimum(bins, HIST_BINS - 1)


def local_contrast(values: np.ndarray, sigma: float = 3.0) -> np.ndarray:
    """Gaussian-weighted local standard deviation of a 2-D plane.

    Computed from the first two blurred moments; the variance is clamped
    at zero before the square root to absorb rounding.
    """
    values = np.asarray(values, dtype=np.float64)
    mean = gaussian_blur(values, sigma)
    second = gaussian_blur(values * values, sigma)
    return np.sqrt(np.maximum(second - mean * mean, 0.0))


def plain_histogram(values: np.ndarray, threshold_bin: int) -> np.ndarray:
    """Counts of all pixels whose bin lies strictly below the threshold."""
    bins = intensity_bin(values)
    return np.bincount(bins[bins < threshold_bin], minlength=HIST_BINS)


def noise_aware_histogram(
    values: np.ndarray,
    contrast: np.ndarray,
    nlf: NoiseLevelFunction,
    threshold_bin: int,
) -> NoiseAwareHistogram:
    """Histogram of sub-threshold pixels whose contrast beats the noise floor.

    Args:
        values: plane supplying the histogram bins, in [0, 1].
        contrast: local contrast of the plane the noise lives on; same
            shape as values.
        nlf: noise level function evaluated at each pixel's intensity.
        threshold_bin: bins at or above this are never counted.

    Returns:
        NoiseAwareHistogram with 256 counts. Bins >= threshold_bin are
        always zero.
    """
    values = np.asarray(values, dtype=np.float64)
    contrast = np.asarray(contrast, dtype=np.float64)
    if values.shape != contrast.shape:
        raise InvalidInputError(
            f"values {values.shape} and contrast {contrast.shape} must match"
        )
    if not 0 < threshold_bin <= 255:
        raise InvalidInputError(f"threshold_bin must be in (0, 255], got {threshold_bin}")

    bins = intensity_bin(values)
    dark = bins < threshold_bin
    keep = dark & (contrast > nlf.level(values))
    selected = int(keep.sum())
    excluded = int(dark.sum()) - selected
    if selected == 0:
        # Nothing survives the gate; better to enhance from the ungated
        # dark histogram than from an empty one.
        return NoiseAwareHistogram(
            counts=plain_histogram(values, threshold_bin),
            threshold_bin=threshold_bin,
            selected=0,
            excluded=excluded,
            used_fallback=True,
        )
    counts = np.bincount(bins[keep], minlength=HIST_BINS)
    return NoiseAwareHistogram(
        counts=counts,
        threshold_bin=threshold_bin,
        selected=selected,
        excluded=excluded,
    )


def export_histogram(hist: NoiseAwareHistogram, path) -> None:
    """Write the histogram probabilities as 256 lines of "bin,probability"."""
    pdf = hist.pdf
    with open(path, "w", encoding="ascii") as fh:
        for code in range(HIST_BINS):
            fh.write(f"{code},{pdf[code]:.10g}\n")
