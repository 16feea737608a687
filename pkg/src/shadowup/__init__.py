"""Noise-aware shadow-region contrast enhancement.

The pipeline splits an image's value channel into smooth illumination and
detail reflectance, designs a monotone tone curve from a noise-gated dark
histogram, lifts the illumination below an adaptive threshold, and
recombines. Highlights and chroma pass through untouched.
"""

from .curve import (
    MappingCurve,
    ThresholdReport,
    apply_curve,
    compute_threshold,
    design_agcwd,
    export_curve,
)
from .decompose import Decomposition, SolverConfig, decompose, solve_spd
from .errors import ConvergenceError, ImageIOError, InvalidInputError, ShadowUpError
from .image import (
    ColorSpace,
    PlanarImage,
    gaussian_filter,
    hsv_to_rgb,
    load_image,
    rgb_to_hsv,
    save_image,
)
from .noise import (
    NoiseAwareHistogram,
    NoiseLevelFunction,
    export_histogram,
    local_contrast,
    noise_aware_histogram,
)
from .pipeline import (
    BaselineMode,
    EnhanceConfig,
    EnhanceReport,
    EnhanceStages,
    enhance,
    enhance_batch,
    enhance_stages,
    enhance_value_channel,
)
from .synth import (
    Pattern,
    SyntheticSpec,
    entropy,
    generate,
    psnr,
    run_noise_benchmark,
    write_benchmark_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineMode",
    "ColorSpace",
    "ConvergenceError",
    "Decomposition",
    "EnhanceConfig",
    "EnhanceReport",
    "EnhanceStages",
    "ImageIOError",
    "InvalidInputError",
    "MappingCurve",
    "NoiseAwareHistogram",
    "NoiseLevelFunction",
    "Pattern",
    "PlanarImage",
    "ShadowUpError",
    "SolverConfig",
    "SyntheticSpec",
    "ThresholdReport",
    "apply_curve",
    "compute_threshold",
    "decompose",
    "design_agcwd",
    "enhance",
    "enhance_batch",
    "enhance_stages",
    "enhance_value_channel",
    "entropy",
    "export_curve",
    "export_histogram",
    "gaussian_filter",
    "generate",
    "hsv_to_rgb",
    "load_image",
    "local_contrast",
    "noise_aware_histogram",
    "psnr",
    "rgb_to_hsv",
    "run_noise_benchmark",
    "save_image",
    "solve_spd",
    "write_benchmark_csv",
]
