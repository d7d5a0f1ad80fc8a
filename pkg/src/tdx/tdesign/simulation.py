"""Temporal-discontinuity subsample simulation and diagnostics.

A temporal-discontinuity design treats the temporally latter ``m = p * n``
members of a clinical sample. The design mimics randomization when the
distribution of the treated subsample over all size-``m`` subsets is close
to uniform. The design parameter ``K = sigma^2 / (t_e - t_s)`` summarises
how much presentation times overlap.
"""

from __future__ import annotations

import itertools
import logging
import math

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from numpy.typing import NDArray
from public import public
from scipy import stats

from tdx.core import SeededStream
from tdx.errors import (
    CohortError,
    InputValidationError,
    ShapeMismatch,
    SpaceTooLarge,
    VarianceUnavailable,
)
from tdx.tdesign.distributions import PresentationCohort

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 10_000
# cells (draws x members) simulated per batch
BATCH_CELLS = 4_000_000

Subset = tuple[int, ...]


@public
@dataclass(frozen=True)
class DesignK:
    """Minimum presentation-time variance relative to the study length."""

    sigma2_min: float
    length: float
    K: float


@public
@dataclass(frozen=True)
class SubsampleDistribution:
    """Probability masses over size-``m`` subsets of ``n`` members.

    Subsets are sorted tuples of 0-based member indices. Subsets without
    mass are left out of ``masses``.
    """

    n: int
    m: int
    kind: Literal['exact', 'empirical']
    masses: dict[Subset, float] = field(default_factory=dict)
    draws: int | None = None

    def mass(self, subset: Subset) -> float:
        """Return the mass of ``subset`` (0 when absent)."""
        return self.masses.get(tuple(sorted(subset)), 0.0)


@public
@dataclass(frozen=True)
class InclusionSummary:
    """Per-member probability of landing in the treated subsample."""

    probs: tuple[float, ...]
    p: float
    draws: int

    @property
    def max_deviation(self) -> float:
        """Return ``max_i |pi_i - p|``, zero under randomization."""
        return max(abs(pi - self.p) for pi in self.probs)


@public
@dataclass(frozen=True)
class SweepPoint:
    """One dispersion level of a K sweep."""

    sigma: float
    design: DesignK
    diagnostic: Literal['tv', 'max-inclusion-deviation']
    distance: float


@dataclass
class _Tally:
    subsets: Counter[Subset] | None
    inclusion: NDArray[np.int64]
    draws: int


def _check_draws(draws: int) -> None:
    if draws < 1:
        raise InputValidationError('draws', f'{draws} < 1')


def _space_size(n: int, m: int) -> int:
    return math.comb(n, m)


@public
def compute_K(cohort: PresentationCohort) -> DesignK:
    """Compute the design parameter of ``cohort``.

    Raises
    ------
    VarianceUnavailable
        When a member variance cannot be computed.
    """
    window = cohort.window
    variances = [member.variance(window) for member in cohort.members]
    sigma2_min = min(variances)
    length = window.length
    if not math.isfinite(sigma2_min) or sigma2_min > length**2 / 4 + 1e-9:
        raise VarianceUnavailable(
            'members',
            f'variance {sigma2_min} is impossible on a window of '
            f'length {length}',
        )
    return DesignK(sigma2_min=sigma2_min, length=length, K=sigma2_min / length)


def _treated(times: NDArray[np.float64], m: int) -> NDArray[np.intp]:
    # stable sort on negated times: among ties the lower index ranks first
    order = np.argsort(-times, axis=1, kind='stable')
    return np.sort(order[:, :m], axis=1)


@public
def sample_td_subsample(
    cohort: PresentationCohort, rng: SeededStream
) -> Subset:
    """Draw presentation times once and return the treated members."""
    times = cohort.draw_times(rng.generator(), 1)
    return tuple(int(i) for i in _treated(times, cohort.m)[0])


def _simulate(
    cohort: PresentationCohort,
    draws: int,
    rng: SeededStream,
    track_subsets: bool,
) -> _Tally:
    _check_draws(draws)
    n, m = cohort.n, cohort.m
    batch = max(1, BATCH_CELLS // n)
    subsets: Counter[Subset] | None = Counter() if track_subsets else None
    inclusion = np.zeros(n, dtype=np.int64)
    done = 0
    for b in itertools.count():
        if done >= draws:
            break
        size = min(batch, draws - done)
        treated = _treated(cohort.draw_times(rng.generator(b), size), m)
        inclusion += np.bincount(treated.ravel(), minlength=n)
        if subsets is not None:
            rows, counts = np.unique(treated, axis=0, return_counts=True)
            for row, count in zip(rows, counts):
                subsets[tuple(int(i) for i in row)] += int(count)
        done += size
        logger.debug('batch %d: %d/%d draws', b, done, draws)
    return _Tally(subsets=subsets, inclusion=inclusion, draws=draws)


def _inclusion(cohort: PresentationCohort, tally: _Tally) -> InclusionSummary:
    return InclusionSummary(
        probs=tuple(float(c) / tally.draws for c in tally.inclusion),
        p=cohort.m / cohort.n,
        draws=tally.draws,
    )


def _empirical(
    cohort: PresentationCohort, subsets: Counter[Subset], draws: int
) -> SubsampleDistribution:
    return SubsampleDistribution(
        n=cohort.n,
        m=cohort.m,
        kind='empirical',
        masses={s: c / draws for s, c in sorted(subsets.items())},
        draws=draws,
    )


@public
def td_distribution(
    cohort: PresentationCohort,
    draws: int,
    rng: SeededStream,
    cap: int = ENUMERATION_CAP,
) -> SubsampleDistribution:
    """Estimate the treated-subsample distribution by simulation.

    Parameters
    ----------
    cohort
        Cohort to simulate.
    draws
        Number of independent presentation-time draws.
    rng
        Stream to draw from; batch ``b`` uses ``rng.generator(b)``.
    cap
        Largest subset space for which masses are kept.

    Raises
    ------
    SpaceTooLarge
        When ``C(n, m)`` exceeds ``cap``.
    """
    size = _space_size(cohort.n, cohort.m)
    if size > cap:
        raise SpaceTooLarge(
            'members',
            f'C({cohort.n}, {cohort.m}) = {size} subsets exceed the cap '
            f'{cap}; use inclusion probabilities instead',
        )
    tally = _simulate(cohort, draws, rng, track_subsets=True)
    return _empirical(cohort, tally.subsets or Counter(), draws)


@public
def td_inclusion_probs(
    cohort: PresentationCohort, draws: int, rng: SeededStream
) -> InclusionSummary:
    """Estimate how often each member lands in the treated subsample."""
    return _inclusion(cohort, _simulate(cohort, draws, rng, False))


@public
def td_simulation(
    cohort: PresentationCohort,
    draws: int,
    rng: SeededStream,
    cap: int = ENUMERATION_CAP,
) -> tuple[SubsampleDistribution | None, InclusionSummary]:
    """Run one simulation and return both summaries.

    The subset distribution is ``None`` when the space exceeds ``cap``.
    With the same stream, the results equal those of
    :func:`td_distribution` and :func:`td_inclusion_probs`.
    """
    enumerable = _space_size(cohort.n, cohort.m) <= cap
    tally = _simulate(cohort, draws, rng, track_subsets=enumerable)
    inclusion = _inclusion(cohort, tally)
    if tally.subsets is None:
        return None, inclusion
    return _empirical(cohort, tally.subsets, draws), inclusion


@public
def randomized_distribution(
    n: int, m: int, cap: int = ENUMERATION_CAP
) -> SubsampleDistribution:
    """Return the uniform distribution over all size-``m`` subsets.

    Raises
    ------
    SpaceTooLarge
        When ``C(n, m)`` exceeds ``cap``.
    """
    if n < 1:
        raise InputValidationError('n', f'{n} < 1')
    if not 0 <= m <= n:
        raise InputValidationError('m', f'{m} is outside [0, {n}]')
    size = _space_size(n, m)
    if size > cap:
        raise SpaceTooLarge(
            'n', f'C({n}, {m}) = {size} subsets exceed the cap {cap}'
        )
    mass = 1 / size
    return SubsampleDistribution(
        n=n,
        m=m,
        kind='exact',
        masses={s: mass for s in itertools.combinations(range(n), m)},
    )


@public
def tv_distance(a: SubsampleDistribution, b: SubsampleDistribution) -> float:
    """Total-variation distance between two subset distributions.

    Raises
    ------
    ShapeMismatch
        When the distributions live on different ``(n, m)`` spaces.
    """
    if (a.n, a.m) != (b.n, b.m):
        raise ShapeMismatch(
            'b', f'(n, m) = ({b.n}, {b.m}) differs from ({a.n}, {a.m})'
        )
    keys = a.masses.keys() | b.masses.keys()
    total = sum(abs(a.mass(k) - b.mass(k)) for k in keys)
    return min(max(total / 2, 0.0), 1.0)


@public
def k_sweep(
    base: PresentationCohort,
    sigmas: Sequence[float],
    draws: int,
    rng: SeededStream,
    cap: int = ENUMERATION_CAP,
) -> list[SweepPoint]:
    """Relate K to the distance from randomization over dispersions.

    Each ``sigmas[i]`` rebuilds every member with that common dispersion
    and simulates it on ``rng.child(i)``. The distance is the TV distance
    to the uniform distribution when ``C(n, m) <= cap``, else the maximum
    inclusion-probability deviation.

    Raises
    ------
    CohortError
        When ``sigmas`` is empty, not positive or not strictly increasing.
    """
    if not sigmas:
        raise CohortError('sigmas', 'at least one value is required')
    if any(s <= 0 for s in sigmas):
        raise CohortError('sigmas', 'values must be positive')
    if any(b <= a for a, b in itertools.pairwise(sigmas)):
        raise CohortError('sigmas', 'values must be strictly increasing')
    enumerable = _space_size(base.n, base.m) <= cap
    uniform = (
        randomized_distribution(base.n, base.m, cap) if enumerable else None
    )
    points = []
    for i, sigma in enumerate(sigmas):
        cohort = base.with_dispersion(sigma)
        design = compute_K(cohort)
        distribution, inclusion = td_simulation(
            cohort, draws, rng.child(i), cap
        )
        if uniform is not None and distribution is not None:
            point = SweepPoint(
                sigma, design, 'tv', tv_distance(distribution, uniform)
            )
        else:
            point = SweepPoint(
                sigma,
                design,
                'max-inclusion-deviation',
                inclusion.max_deviation,
            )
        logger.info(
            'sigma=%g K=%g %s=%g',
            sigma,
            design.K,
            point.diagnostic,
            point.distance,
        )
        points.append(point)
    return points


@public
def sweep_trend(points: Sequence[SweepPoint]) -> float:
    """Spearman rank correlation between K and the distance diagnostic.

    Returns ``nan`` for fewer than two points or a constant series.
    """
    if len(points) < 2:
        return math.nan
    ks = [pt.design.K for pt in points]
    distances = [pt.distance for pt in points]
    if len(set(ks)) < 2 or len(set(distances)) < 2:
        return math.nan
    return float(stats.spearmanr(ks, distances).statistic)
