"""Noisy group testing under an i.i.d. prior.

Threshold calculators, the non-adaptive SPOG design and decoder, the
adaptive PRESTO protocol, exact small-instance oracles and a seeded
Monte Carlo harness.
"""

from .channel import NoisyChannel, apply_noise, beta, kappa, kl_bernoulli, threshold_c, validate_channel
from .kernels import BACKEND
from .population import Role, TestDesign, good_test_counts, sample_ground_truth, true_results
from .thresholds import c_ad, c_na, gamma_star, m_ad, m_na, xi

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "NoisyChannel", "Role", "TestDesign", "apply_noise", "beta", "c_ad", "c_na",
    "gamma_star", "good_test_counts", "kappa", "kl_bernoulli", "m_ad", "m_na",
    "sample_ground_truth", "threshold_c", "true_results", "validate_channel", "xi",
]
