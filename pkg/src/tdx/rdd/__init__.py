"""Noise-induced discontinuity design package."""

from .densities import GaussianLatent, Noise, UniformLatent
from .profiles import Constant, Linear, StepFunction
from .simulation import (
    AdversarialCalibration,
    RddResult,
    RddScenario,
    adversarial_scenario,
    calibrate_adversarial,
    conditional_latent_density,
    latent_grid,
    simulate_rdd,
)

__all__ = [
    'AdversarialCalibration',
    'Constant',
    'GaussianLatent',
    'Linear',
    'Noise',
    'RddResult',
    'RddScenario',
    'StepFunction',
    'UniformLatent',
    'adversarial_scenario',
    'calibrate_adversarial',
    'conditional_latent_density',
    'latent_grid',
    'simulate_rdd',
]
