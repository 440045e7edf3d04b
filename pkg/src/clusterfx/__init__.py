"""Nonparametric relative effects for partially complete clustered pre-post data."""
from .analysis import AnalysisReport, analyze
from .covariance import CovEstimate, estimate_covariance
from .data import ClusterRecord, StudyData, load_csv, dump_csv, validate
from .effects import EffectEstimate, decompose, estimate_p
from .inference import (
    ContrastKind,
    anova_type_test,
    build_contrast,
    chi2_tail,
    effect_ci,
    wald_type_test,
)
from .ranks import midranks, pairwise_w
from .sim import SimulationConfig, SimulationReport, run_experiment

__version__ = "0.1.0"
