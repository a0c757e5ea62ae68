"""Empirical-Bayes frequency estimation for sinusoids with uniformly random frequencies.

Modules
-------
kernel   modulated sinc covariances and concentration-matrix spectra
signal   synthetic snapshot panels
covest   panel covariance, noise floor, rank and bandwidth estimates
subspace center frequencies from a shift-invariant realization
mapest   MAP refinement of the frequencies inside the prior box
harness  Monte-Carlo campaigns and error metrics
"""
from .covest import CovEstimate, estimate_covariance, rank_by_ratio
from .harness import McConfig, TrialRecord, run_campaign, sample_hyperparams
from .kernel import (
    EigenSystem,
    FrequencyBand,
    PriorHyperParams,
    ToeplitzCovariance,
    build_observed_cov,
    build_signal_cov,
    concentration_matrix,
    theoretical_rank,
)
from .mapest import MapProblem, MapResult, map_refine
from .signal import PanelConfig, SnapshotPanel, generate_panel, make_rng
from .subspace import SubspaceResult, estimate_centers

__version__ = "0.1.0"

__all__ = [
    "CovEstimate",
    "EigenSystem",
    "FrequencyBand",
    "MapProblem",
    "MapResult",
    "McConfig",
    "PanelConfig",
    "PriorHyperParams",
    "SnapshotPanel",
    "SubspaceResult",
    "ToeplitzCovariance",
    "TrialRecord",
    "build_observed_cov",
    "build_signal_cov",
    "concentration_matrix",
    "estimate_centers",
    "estimate_covariance",
    "generate_panel",
    "make_rng",
    "map_refine",
    "rank_by_ratio",
    "run_campaign",
    "sample_hyperparams",
    "theoretical_rank",
]
