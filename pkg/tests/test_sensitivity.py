"""Tests for the closed-form success-rate bounds."""

from fractions import Fraction

import numpy as np
import pytest

from tdx.core import Proportion, RatePair
from tdx.errors import AlphaInfeasible, BadAttrition, InputValidationError
from tdx.sensitivity import (
    alpha_curve,
    alpha_domain,
    attrition_adjusted_rate,
    bounds_unconstrained,
    bounds_with_alpha,
    feasible_alpha_domain,
    lower_alpha_domain,
)

UNCONSTRAINED_TEST_CASES = [
    # r_j, r_k, U, L
    (0.435, 0.465, 0.9, 0.0),
    (1.0, 1.0, 1.0, 1.0),
    (0.4, 0.6, 1.0, 0.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.8, 0.7, 1.0, 0.5),
]

ALPHA_TEST_CASES = [
    # r_j, r_k, alpha, U, L
    (0.435, 0.465, 0.03, 0.465, 0.435),
    (0.435, 0.465, 0.9, 0.9, 0.0),
    (0.5, 0.5, 0.0, 0.5, 0.5),
    (0.5, 0.5, 1.0, 1.0, 0.0),
]

ATTRITION_TEST_CASES = [
    # success rate, excluded, withdrawn, adjusted
    (0.96, 0.0, 2 / 28, 0.96 - 2 / 28),
    (0.5, 0.0, 0.0, 0.5),
    (0.1, 0.1, 0.1, 0.0),
]

RNG = np.random.default_rng(20240501)
RANDOM_RATES = [tuple(RNG.uniform(0, 1, 2)) for _ in range(50)]


@pytest.mark.parametrize('rj,rk,U,L', UNCONSTRAINED_TEST_CASES)
def test_bounds_unconstrained(rj, rk, U, L):
    """Test the bounds when alpha is unknown."""
    result = bounds_unconstrained(RatePair.of(rj, rk))
    assert result.U.value == pytest.approx(U, abs=1e-12)
    assert result.L.value == pytest.approx(L, abs=1e-12)


def test_bounds_unconstrained_exact():
    """Test that rational rates give exact rational bounds."""
    rates = RatePair.of(Fraction(87, 200), Fraction(93, 200))
    result = bounds_unconstrained(rates)
    assert result.U.value == Fraction(9, 10)
    assert result.L.value == 0


@pytest.mark.parametrize('rj,rk,alpha,U,L', ALPHA_TEST_CASES)
def test_bounds_with_alpha(rj, rk, alpha, U, L):
    """Test the bounds for a hypothesised affected proportion."""
    result = bounds_with_alpha(RatePair.of(rj, rk), Proportion(alpha))
    assert result.U.value == pytest.approx(U, abs=1e-12)
    assert result.L.value == pytest.approx(L, abs=1e-12)
    assert result.alpha_used == Proportion(alpha)


@pytest.mark.parametrize(
    'rj,rk,alpha', [(0.435, 0.465, 0.01), (0.7, 0.7, 1.0), (0.2, 0.9, 0.5)]
)
def test_bounds_with_alpha_infeasible(rj, rk, alpha):
    """Test that alpha outside the feasible domain raises AlphaInfeasible."""
    with pytest.raises(AlphaInfeasible) as exc:
        bounds_with_alpha(RatePair.of(rj, rk), Proportion(alpha))
    assert exc.value.field == 'alpha'
    assert exc.value.exit_code == 3


def test_alpha_domains(crohns_rates):
    """Test the U, L and feasible alpha domains of the Crohn's rates."""
    upper = alpha_domain(crohns_rates)
    lower = lower_alpha_domain(crohns_rates)
    feasible = feasible_alpha_domain(crohns_rates)
    assert upper.lo.value == pytest.approx(0.03)
    assert upper.hi.value == pytest.approx(0.9)
    assert lower.lo.value == pytest.approx(0.03)
    assert lower.hi.value == 1
    assert feasible.lo.value == pytest.approx(0.03)
    assert feasible.hi.value == pytest.approx(0.9)


@pytest.mark.parametrize('rj,rk', [(0.0, 0.0), (1.0, 1.0)])
def test_alpha_domain_degenerate(rj, rk):
    """Test that identical extreme rates only allow alpha = 0."""
    domain = feasible_alpha_domain(RatePair.of(rj, rk))
    assert domain.lo.value == 0
    assert domain.hi.value == 0


@pytest.mark.parametrize('rj,rk', RANDOM_RATES)
def test_bounds_properties(rj, rk):
    """Test ordering, symmetry and duality of the closed forms."""
    rates = RatePair.of(rj, rk)
    result = bounds_unconstrained(rates)
    assert 0 <= result.L.value <= result.U.value <= 1
    assert max(rj, rk) <= result.U.value + 1e-12
    assert result.L.value <= min(rj, rk) + 1e-12

    swapped = bounds_unconstrained(rates.swapped())
    assert swapped.U.value == pytest.approx(result.U.value, abs=1e-12)
    assert swapped.L.value == pytest.approx(result.L.value, abs=1e-12)

    failures = bounds_unconstrained(rates.complemented())
    assert result.L.value == pytest.approx(1 - failures.U.value, abs=1e-12)


@pytest.mark.parametrize('rj,rk', RANDOM_RATES)
def test_bounds_monotone_in_alpha(rj, rk):
    """Test that U grows and L shrinks along the alpha curve."""
    curve = alpha_curve(RatePair.of(rj, rk), points=7)
    uppers = [b.U.value for _, b in curve]
    lowers = [b.L.value for _, b in curve]
    assert all(b >= a - 1e-12 for a, b in zip(uppers, uppers[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(lowers, lowers[1:]))


@pytest.mark.parametrize('rj,rk', RANDOM_RATES)
def test_bounds_endpoint_identities(rj, rk):
    """Test the bounds at both ends of the feasible alpha domain."""
    rates = RatePair.of(rj, rk)
    domain = feasible_alpha_domain(rates)
    at_lo = bounds_with_alpha(rates, domain.lo)
    assert at_lo.U.value == pytest.approx(max(rj, rk), abs=1e-12)
    assert at_lo.L.value == pytest.approx(min(rj, rk), abs=1e-12)
    free = bounds_unconstrained(rates)
    at_hi = bounds_with_alpha(rates, domain.hi)
    assert at_hi.U.value <= free.U.value + 1e-12
    assert at_hi.L.value >= free.L.value - 1e-12


def test_alpha_curve_points(crohns_rates):
    """Test the three-point alpha curve of the Crohn's rates."""
    curve = alpha_curve(crohns_rates, points=3)
    assert [a for a, _ in curve] == pytest.approx([0.03, 0.465, 0.9])
    assert [b.U.value for _, b in curve] == pytest.approx(
        [0.465, 0.6825, 0.9]
    )
    assert [b.L.value for _, b in curve] == pytest.approx(
        [0.435, 0.2175, 0.0], abs=1e-12
    )


def test_alpha_curve_needs_two_points(crohns_rates):
    """Test that a one-point curve is rejected."""
    with pytest.raises(InputValidationError):
        alpha_curve(crohns_rates, points=1)


@pytest.mark.parametrize(
    'sr,excluded,withdrawn,expected', ATTRITION_TEST_CASES
)
def test_attrition_adjusted_rate(sr, excluded, withdrawn, expected):
    """Test the worst-case rate after exclusion and withdrawal."""
    adjusted = attrition_adjusted_rate(
        Proportion(sr), Proportion(excluded), Proportion(withdrawn)
    )
    assert adjusted.value == pytest.approx(expected, abs=1e-12)


def test_attrition_adjusted_rate_trial():
    """Test a 28-patient arm with two withdrawals and 96% success."""
    adjusted = attrition_adjusted_rate(
        Proportion(0.96), Proportion(0.0), Proportion(2 / 28)
    )
    assert adjusted.value == pytest.approx(0.889, abs=1e-3)


def test_attrition_exceeding_sample():
    """Test that losing more than the whole sample raises BadAttrition."""
    with pytest.raises(BadAttrition):
        attrition_adjusted_rate(
            Proportion(0.6), Proportion(0.5), Proportion(0.6)
        )
