"""Unbalanced-disc benchmark: nonlinear data generation, LPV embedding and the identification study"""

from .config import ExperimentConfig, UnbalancedDiscParams
from .disc import disc_ct_model, embed_lpv, scheduling_from_angle, simulate_disc
from .experiment import ExperimentReport, disc_templates, run_experiment
from .signals import add_noise_snr, gen_multisine

__all__ = (
    "ExperimentConfig",
    "ExperimentReport",
    "UnbalancedDiscParams",
    "add_noise_snr",
    "disc_ct_model",
    "disc_templates",
    "embed_lpv",
    "gen_multisine",
    "run_experiment",
    "scheduling_from_angle",
    "simulate_disc",
)
