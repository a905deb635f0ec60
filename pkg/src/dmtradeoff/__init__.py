"""Diversity-multiplexing tradeoff laboratory for selective-fading MIMO channels."""

from .channel_model import (
    AntennaConfig,
    CovarianceSpec,
    PowerDelayProfile,
    build_covariance_from_correlation,
    build_covariance_from_pdp,
    covariance_rank,
    jensen_channel,
    sample_channel,
    sample_reduced_iid,
)
from .code_criterion import Codebook, check_codebook, codebook_lambda, criterion_rank, pep_upper_bound
from .info_metrics import SnrPoint, jensen_mutual_information, mutual_information
from .montecarlo import estimate_jensen_outage, estimate_outage, fit_exponent, sweep
from .tradeoff_curves import evaluate, frequency_selective_curve, jensen_curve

__version__ = "0.1.0"
