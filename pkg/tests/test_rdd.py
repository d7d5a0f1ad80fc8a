"""Tests for the noise-induced discontinuity Monte Carlo."""

import logging
import math

from pathlib import Path

import numpy as np
import pytest

from pydantic import ValidationError
from scipy import integrate, stats

import tdx

from tdx.core import SeededStream
from tdx.errors import (
    CalibrationFailed,
    DegenerateWindow,
    InputValidationError,
    ScenarioError,
    ZeroMass,
)
from tdx.rdd import (
    Constant,
    GaussianLatent,
    Linear,
    Noise,
    RddScenario,
    StepFunction,
    UniformLatent,
    adversarial_scenario,
    calibrate_adversarial,
    conditional_latent_density,
    latent_grid,
    simulate_rdd,
)
from tdx.schema.config import load_run_config

EXAMPLES_DIR = Path(tdx.__file__).parent / 'examples'


def gaussian_scenario(noise, **kwargs):
    """Standard normal latent scores with the given noise."""
    return RddScenario(
        cutoff=kwargs.pop('cutoff', 0.0),
        delta=kwargs.pop('delta', 0.05),
        latent=GaussianLatent(mean=0.0, sd=1.0),
        noise=noise,
        **kwargs,
    )


def density_on(sc, z):
    """Return the conditional density as grid and value arrays."""
    u, d = np.array(conditional_latent_density(sc, z)).T
    return u, d


def bin_probabilities(u, d, edges):
    """Integrate the density over each bin."""
    probs = []
    for lo, hi in zip(edges, edges[1:]):
        xs = np.linspace(lo, hi, 201)
        probs.append(integrate.trapezoid(np.interp(xs, u, d), xs))
    return np.array(probs)


def rejection_histogram(sc, z, band, draws, edges, seed, chunks=5):
    """Histogram of latent scores whose running variable falls near z."""
    gen = np.random.default_rng(seed)
    counts = np.zeros(len(edges) - 1)
    accepted = 0
    for _ in range(chunks):
        u = sc.latent.sample(gen, draws // chunks)
        keep = np.abs(u + sc.noise.sample(gen, u.size) - z) < band
        counts += np.histogram(u[keep], bins=edges)[0]
        accepted += int(keep.sum())
    return counts, accepted


PROFILE_TEST_CASES = [
    # profile, scores, values
    (Constant(value=0.2), [-1.0, 0.0, 5.0], [0.2, 0.2, 0.2]),
    (Linear(intercept=0.5, slope=0.1, anchor=1.0), [0.0, 1.0], [0.4, 0.5]),
    (
        StepFunction(edges=[0.0, 1.0, 2.0], values=[0.1, -0.1], outside=0.3),
        [-0.5, 0.0, 0.99, 1.0, 2.0],
        [0.3, 0.1, 0.1, -0.1, 0.3],
    ),
]


@pytest.mark.parametrize('profile,scores,values', PROFILE_TEST_CASES)
def test_profiles(profile, scores, values):
    """Test constant, linear and banded effect profiles."""
    np.testing.assert_allclose(profile(np.array(scores)), values)


def test_step_function_shape():
    """Test that bands need one value each and increasing edges."""
    with pytest.raises(ValidationError):
        StepFunction(edges=[0.0, 1.0], values=[0.1, 0.2])
    with pytest.raises(ValidationError):
        StepFunction(edges=[1.0, 0.0], values=[0.1])


def test_noise_support():
    """Test the effective support of both noise families."""
    assert Noise(family='uniform', scale=2.0).support() == (-2.0, 2.0)
    assert Noise(scale=0.5).support() == (-5.0, 5.0)


def test_scenario_window_default():
    """Test that the latent window defaults to the running-variable one."""
    sc = gaussian_scenario(Noise(scale=0.2), cutoff=1.0, delta=0.1)
    assert sc.window == (0.9, 1.1)


def test_scenario_rejects_bad_probabilities():
    """Test that outcome probabilities must stay in [0, 1]."""
    with pytest.raises(ScenarioError):
        gaussian_scenario(
            Noise(scale=0.2),
            baseline=Constant(value=0.95),
            effect=Constant(value=0.1),
        )


def test_scenario_rejects_unknown_keys():
    """Test that scenario mappings are validated strictly."""
    with pytest.raises(ValidationError):
        RddScenario.model_validate(
            {
                'cutoff': 0,
                'delta': 0.1,
                'latent': {'family': 'gaussian', 'mean': 0, 'sd': 1},
                'noise': {'family': 'gaussian', 'scale': 1, 'sd': 1},
            }
        )


def test_density_flat_latent_gaussian_noise():
    """Test that a flat latent density returns the noise density."""
    sc = RddScenario(
        cutoff=0.0,
        delta=0.1,
        latent=UniformLatent(lo=-50.0, hi=50.0),
        noise=Noise(scale=1.0),
    )
    u, d = density_on(sc, 3.0)
    assert (u[0], u[-1]) == pytest.approx((-7.0, 13.0))
    np.testing.assert_allclose(d, stats.norm.pdf(u - 3.0), atol=1e-6)


def test_density_flat_latent_uniform_noise():
    """Test that uniform noise gives a uniform conditional density."""
    sc = RddScenario(
        cutoff=0.0,
        delta=0.1,
        latent=UniformLatent(lo=-50.0, hi=50.0),
        noise=Noise(family='uniform', scale=0.5),
    )
    u, d = density_on(sc, 3.0)
    assert (u[0], u[-1]) == (2.5, 3.5)
    np.testing.assert_allclose(d, 1.0, atol=1e-9)


def test_density_shifts_toward_latent_mass():
    """Test the normal-normal posterior mean (shrinkage towards 0)."""
    sc = gaussian_scenario(Noise(scale=0.5))
    u, d = density_on(sc, 1.5)
    assert integrate.trapezoid(d, u) == pytest.approx(1.0, abs=1e-9)
    assert integrate.trapezoid(u * d, u) == pytest.approx(1.2, abs=1e-4)


def test_density_custom_grid():
    """Test evaluation on a caller-supplied grid."""
    sc = gaussian_scenario(Noise(scale=0.5))
    grid = np.linspace(-1.0, 3.0, 801)
    result = conditional_latent_density(sc, 1.0, grid)
    assert [u for u, _ in result] == pytest.approx(list(grid))


@pytest.mark.parametrize('grid', [[0.0], [0.0, 0.0, 1.0], [1.0, 0.0]])
def test_density_bad_grid(grid):
    """Test that a grid must hold two strictly increasing points."""
    sc = gaussian_scenario(Noise(scale=0.5))
    with pytest.raises(InputValidationError):
        conditional_latent_density(sc, 0.0, np.array(grid))


def test_density_zero_mass():
    """Test conditioning on a value no latent score can produce."""
    sc = RddScenario(
        cutoff=0.5,
        delta=0.05,
        latent=UniformLatent(lo=0.0, hi=1.0),
        noise=Noise(family='uniform', scale=0.1),
    )
    with pytest.raises(ZeroMass):
        latent_grid(sc, 5.0)
    with pytest.raises(ZeroMass):
        conditional_latent_density(sc, 0.5, np.array([3.0, 4.0]))


def test_density_matches_rejection_sampling_gaussian():
    """Test the density against accepted draws with Z near z."""
    sc = gaussian_scenario(Noise(scale=0.5))
    z = 1.5
    edges = np.linspace(0.0, 2.4, 13)
    counts, accepted = rejection_histogram(sc, z, 0.02, 2_000_000, edges, 1)
    assert accepted > 5000
    probs = bin_probabilities(*density_on(sc, z), edges)
    expected = accepted * probs
    se = np.sqrt(accepted * probs * (1 - probs))
    assert np.all(np.abs(counts - expected) <= 5 * se + 1)


def test_density_matches_rejection_sampling_uniform():
    """Test the density under uniform noise against accepted draws."""
    sc = gaussian_scenario(Noise(family='uniform', scale=0.5))
    z = 1.0
    edges = np.linspace(0.5, 1.5, 11)
    counts, accepted = rejection_histogram(
        sc, z, 0.002, 10_000_000, edges, 2
    )
    assert accepted > 5000
    probs = bin_probabilities(*density_on(sc, z), edges)
    expected = accepted * probs
    se = np.sqrt(accepted * probs * (1 - probs))
    assert np.all(np.abs(counts - expected) <= 5 * se + 1)


def test_simulate_constant_effect_unbiased(stream):
    """Test that a constant effect is recovered at the cutoff."""
    sc = gaussian_scenario(
        Noise(family='uniform', scale=0.3),
        effect=Constant(value=0.02),
        baseline=Constant(value=0.3),
    )
    result = simulate_rdd(sc, 1_000_000, stream)
    assert abs(result.window_estimate - 0.02) <= 3 * result.mc_se
    assert result.true_window_ate == pytest.approx(0.02)
    assert result.n_window == result.n_above + result.n_below
    assert result.n_pop == 1_000_000
    assert result.warning is None


def test_simulate_replicates_cover_truth():
    """Test coverage of the 3 standard error band over seeds."""
    sc = gaussian_scenario(
        Noise(scale=0.3),
        delta=0.1,
        effect=Constant(value=0.05),
        baseline=Constant(value=0.3),
    )
    covered = 0
    for seed in range(20):
        result = simulate_rdd(sc, 200_000, SeededStream(seed))
        if abs(result.window_estimate - 0.05) <= 3 * result.mc_se:
            covered += 1
    assert covered >= 19


def test_simulate_reproducible():
    """Test that one seed reproduces the result exactly."""
    sc = gaussian_scenario(Noise(scale=0.3), effect=Constant(value=0.1))
    first = simulate_rdd(sc, 50_000, SeededStream(9), batch_size=20_000)
    second = simulate_rdd(sc, 50_000, SeededStream(9), batch_size=20_000)
    assert first == second


def test_simulate_small_population_warns(stream, caplog):
    """Test the warning for populations too small for mc_se."""
    sc = gaussian_scenario(Noise(scale=0.3), delta=1.0)
    with caplog.at_level(logging.WARNING, logger='tdx.rdd.simulation'):
        result = simulate_rdd(sc, 500, stream)
    assert result.warning is not None
    assert 'n_pop=500' in caplog.text


def test_simulate_empty_window(stream):
    """Test that an empty side of the window raises DegenerateWindow."""
    sc = gaussian_scenario(Noise(scale=0.3), delta=1e-9)
    with pytest.raises(DegenerateWindow) as exc:
        simulate_rdd(sc, 1000, stream)
    assert exc.value.field == 'delta'
    assert exc.value.exit_code == 4


def test_simulate_empty_latent_window(stream):
    """Test that an unpopulated latent window raises DegenerateWindow."""
    sc = gaussian_scenario(
        Noise(scale=0.3), delta=0.5, latent_window=(6.0, 7.0)
    )
    with pytest.raises(DegenerateWindow) as exc:
        simulate_rdd(sc, 1000, stream)
    assert exc.value.field == 'latent_window'


def test_calibrate_adversarial():
    """Test the band calibration around a cutoff of 1500."""
    calibration = calibrate_adversarial(1500.0, (1499.0, 1501.0), 0.5)
    sc = calibration.scenario
    assert calibration.half_width == pytest.approx(0.5, abs=1e-6)
    assert calibration.window_integral == pytest.approx(0.0, abs=1e-6)
    assert calibration.reweighted_integral > 0
    assert sc.delta == pytest.approx(0.1)
    assert sc.window == (1499.0, 1501.0)
    assert sc.latent.support() == (1495.0, 1505.0)
    np.testing.assert_allclose(
        sc.effect(np.array([1499.2, 1500.0, 1500.7, 1501.5])),
        [-0.1, 0.1, -0.1, 0.0],
    )
    assert adversarial_scenario(1500.0, (1499.0, 1501.0), 0.5) == sc


def test_adversarial_gap():
    """Test a positive discontinuity with zero average window effect."""
    sc = adversarial_scenario(1500.0, (1499.0, 1501.0), 0.5)
    result = simulate_rdd(sc, 10_000_000, SeededStream(0))
    assert result.window_estimate > 0.005
    assert abs(result.true_window_ate) < 0.001
    gap = result.window_estimate - result.true_window_ate
    assert gap > 5 * result.mc_se


def test_adversarial_uniform_noise_is_representative(stream):
    """Test that uniform noise covering the window shows no gap."""
    calibration = calibrate_adversarial(
        1500.0, (1499.0, 1501.0), 1.0, 'uniform', delta=0.05
    )
    assert calibration.reweighted_integral == pytest.approx(0.0, abs=1e-4)
    result = simulate_rdd(calibration.scenario, 1_000_000, stream)
    assert abs(result.window_estimate) <= 3 * result.mc_se


@pytest.mark.parametrize('noise_scale', [0.0, 1e-5])
def test_calibration_needs_resolvable_noise(noise_scale):
    """Test that missing or unresolvable noise cannot be calibrated."""
    with pytest.raises(CalibrationFailed) as exc:
        calibrate_adversarial(1500.0, (1499.0, 1501.0), noise_scale)
    assert exc.value.exit_code == 3


def test_calibration_needs_cutoff_inside_window():
    """Test that the latent window must contain the cutoff."""
    with pytest.raises(ScenarioError):
        calibrate_adversarial(1500.0, (1501.0, 1503.0), 0.5)


def test_birthweight_example():
    """Test the bundled birth-weight scenario at ten million births."""
    run = load_run_config(EXAMPLES_DIR / 'birthweight-rdd.yaml')
    params = run.command_params()
    result = simulate_rdd(
        params.scenario, params.n_pop, SeededStream(run.seed)
    )
    assert result.rate_above == pytest.approx(0.045, abs=0.003)
    assert result.rate_below == pytest.approx(0.055, abs=0.003)
    assert result.window_estimate == pytest.approx(-0.01, abs=0.003)
    assert math.isfinite(result.mc_se)
