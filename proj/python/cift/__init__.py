"""Dataset-composition tuning: feature-space SNR sweeps, robustness scores and theory oracles."""

from ._core import (
    CiftError,
    cli,
    collapse_critical_fraction,
    detect_decoherence,
    first_principal_component,
    fit_gaussian,
    frechet_distance_sq,
    load_features,
    mixture_variance,
    normalized_mi_closed_form,
    robustness_score_from_means,
    rs_curve,
    run_oracle_suite,
    run_sweep,
    snr_from_moments,
    snr_of_mixture,
    sweep_arrays,
    write_features,
)

__all__ = [
    "CiftError",
    "cli",
    "collapse_critical_fraction",
    "detect_decoherence",
    "first_principal_component",
    "fit_gaussian",
    "frechet_distance_sq",
    "load_features",
    "mixture_variance",
    "normalized_mi_closed_form",
    "robustness_score_from_means",
    "rs_curve",
    "run_oracle_suite",
    "run_sweep",
    "snr_from_moments",
    "snr_of_mixture",
    "sweep_arrays",
    "write_features",
]
