"""Secondary studies: grain-size regression, wet/dry, noise, merging."""

from .grain import (
    LinearFit,
    RegressionReport,
    fit_line,
    grain_regression,
    segment_spectral_features,
)
from .merge import merge_and_eval, merged_label_map, remap_predictions
from .noise import noise_eval
from .wetdry import joint_label, load_wet_dry_features, wet_dry_eval

__all__ = [
    "LinearFit",
    "RegressionReport",
    "fit_line",
    "grain_regression",
    "joint_label",
    "load_wet_dry_features",
    "merge_and_eval",
    "merged_label_map",
    "noise_eval",
    "remap_predictions",
    "segment_spectral_features",
    "wet_dry_eval",
]
