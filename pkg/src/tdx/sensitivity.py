"""Bounds on success rates under heterogeneous treatment effects.

Two observed rates ``(r_j, r_k)`` leave the joint distribution of the
potential outcomes, the response table ``(s, t, u, v)``, partially
identified. The closed forms below give the best (``U``) and worst (``L``)
success rate a policy that picks the better arm per individual could
reach, optionally constrained by the affected proportion
``alpha = u + v``. :func:`oracle_bounds` recomputes the same numbers by
enumerating integer response tables.
"""

from __future__ import annotations

import logging

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from public import public

from tdx.core import Proportion, RatePair
from tdx.errors import (
    AlphaInfeasible,
    BadAttrition,
    InfeasibleConstraints,
    InputValidationError,
    MissingAssignment,
    MissingPotentialOutcome,
    NonIntegralRates,
    SpaceTooLarge,
)
from tdx.utils import TOLERANCE, Number, nearest_integer

logger = logging.getLogger(__name__)

ORACLE_CAP = 10_000
DEFAULT_TOLERANCE = 1e-9


@public
@dataclass(frozen=True)
class BoundsResult:
    """Maximum (``U``) and minimum (``L``) achievable success rates."""

    U: Proportion
    L: Proportion
    alpha_used: Proportion | None = None
    n_feasible: int | None = None


@public
@dataclass(frozen=True)
class AlphaDomain:
    """Closed interval of affected proportions."""

    lo: Proportion
    hi: Proportion

    def contains(self, alpha: Number, tol: float = TOLERANCE) -> bool:
        """Check membership with a small tolerance for float input."""
        return self.lo.value - tol <= alpha <= self.hi.value + tol


def _clip(value: Number) -> Number:
    # float round-off may push a rate a hair outside [0, 1]
    if isinstance(value, Fraction):
        return value
    return min(max(value, 0.0), 1.0)


@public
def alpha_domain(rates: RatePair) -> AlphaDomain:
    """Return the domain ``[|r_j - r_k|, min{r_j + r_k, 1}]`` of ``U``."""
    lo = abs(rates.j - rates.k)
    hi = min(rates.j + rates.k, 1)
    return AlphaDomain(Proportion(_clip(lo)), Proportion(_clip(hi)))


@public
def lower_alpha_domain(rates: RatePair) -> AlphaDomain:
    """Return the domain of ``L``, i.e. the domain of the failure rates."""
    return alpha_domain(rates.complemented())


def _feasible_interval(rates: RatePair) -> tuple[Number, Number]:
    j, k = rates.j, rates.k
    return abs(j - k), min(j + k, 2 - j - k)


@public
def feasible_alpha_domain(rates: RatePair) -> AlphaDomain:
    """Return the affected proportions realised by some response table.

    This is the intersection of the ``U`` and ``L`` domains,
    ``[|r_j - r_k|, min{r_j + r_k, 2 - r_j - r_k}]``.
    """
    lo, hi = _feasible_interval(rates)
    return AlphaDomain(Proportion(_clip(lo)), Proportion(_clip(hi)))


@public
def bounds_unconstrained(rates: RatePair) -> BoundsResult:
    """Bound the success rate when ``alpha`` is unknown."""
    upper = min(rates.j + rates.k, 1)
    lower = 1 - min((1 - rates.j) + (1 - rates.k), 1)
    return BoundsResult(Proportion(_clip(upper)), Proportion(_clip(lower)))


@public
def bounds_with_alpha(rates: RatePair, alpha: Proportion) -> BoundsResult:
    """Bound the success rate for a hypothesised affected proportion.

    Raises
    ------
    AlphaInfeasible
        When no response table with these rates has ``u + v = alpha``.
    """
    lo, hi = _feasible_interval(rates)
    a = alpha.value
    if not lo - TOLERANCE <= a <= hi + TOLERANCE:
        raise AlphaInfeasible(
            'alpha',
            f'{a} is outside the feasible domain '
            f'[{_clip(lo)}, {_clip(hi)}] for rates '
            f'({rates.j}, {rates.k})',
        )
    total = rates.j + rates.k
    upper = min((total + a) / 2, 1)
    # equals 1 - min{((1 - r_j) + (1 - r_k) + alpha) / 2, 1}
    lower = max((total - a) / 2, 0)
    return BoundsResult(
        Proportion(_clip(upper)), Proportion(_clip(lower)), alpha
    )


@public
def alpha_curve(
    rates: RatePair, points: int = 11
) -> list[tuple[Number, BoundsResult]]:
    """Evaluate ``U(alpha)`` and ``L(alpha)`` across the feasible domain."""
    if points < 2:
        raise InputValidationError('points', f'{points} < 2')
    domain = feasible_alpha_domain(rates)
    lo, hi = domain.lo.value, domain.hi.value
    curve = []
    for i in range(points):
        alpha = lo + (hi - lo) * i / (points - 1)
        alpha = _clip(alpha)
        curve.append((alpha, bounds_with_alpha(rates, Proportion(alpha))))
    return curve


def _count(name: str, n: int, rate: Number) -> int:
    count = nearest_integer(n * rate)
    if count is None:
        raise NonIntegralRates(
            name, f'{n} * {rate} = {n * rate} is not an integer'
        )
    return count


@public
def feasible_tables(
    n: int, K: int, J: int, A: int | None = None
) -> Iterator[tuple[int, int, int, int]]:
    """Yield every integer table ``(S, T, U, V)`` with the given counts.

    The tables satisfy ``S + T + U + V = n``, ``S + U = K``,
    ``S + V = J`` and, when ``A`` is given, ``U + V = A``. Once ``S`` is
    chosen the equality constraints fix the other three counts, so the
    loop over ``S`` visits the whole feasible set. ``U + V = K + J - 2S``
    leaves a single candidate ``S`` when ``A`` is given.
    """
    if A is None:
        candidates = range(min(K, J) + 1)
    else:
        twice = K + J - A
        if twice < 0 or twice % 2:
            return
        candidates = range(twice // 2, twice // 2 + 1)
    for S in candidates:
        U = K - S
        V = J - S
        T = n - S - U - V
        if min(U, V, T) < 0:
            continue
        yield S, T, U, V


@public
def oracle_bounds(
    n: int,
    rates: RatePair,
    alpha: Proportion | None = None,
    cap: int = ORACLE_CAP,
) -> BoundsResult:
    """Compute ``U`` and ``L`` exactly by enumerating response tables.

    Raises
    ------
    NonIntegralRates
        When ``n * r`` (or ``n * alpha``) is not an integer.
    InfeasibleConstraints
        When no integer table satisfies the constraints.
    SpaceTooLarge
        When ``n`` exceeds ``cap``.
    """
    if n < 1:
        raise InputValidationError('n', f'{n} < 1')
    if n > cap:
        raise SpaceTooLarge('n', f'{n} exceeds the oracle cap {cap}')
    K = _count('r_k', n, rates.k)
    J = _count('r_j', n, rates.j)
    A = None if alpha is None else _count('alpha', n, alpha.value)

    best_top = best_bottom = None
    feasible = 0
    for S, _T, U, V in feasible_tables(n, K, J, A):
        feasible += 1
        top = S + U + V
        best_top = top if best_top is None else max(best_top, top)
        best_bottom = S if best_bottom is None else min(best_bottom, S)
    if best_top is None or best_bottom is None:
        raise InfeasibleConstraints(
            'alpha' if A is not None else 'rates',
            f'no integer response table of size {n} matches '
            f'r_j={rates.j}, r_k={rates.k}'
            + ('' if alpha is None else f', alpha={alpha.value}'),
        )
    logger.debug('oracle n=%d visited %d feasible tables', n, feasible)
    return BoundsResult(
        Proportion(Fraction(best_top, n)),
        Proportion(Fraction(best_bottom, n)),
        alpha,
        feasible,
    )


@public
def attrition_adjusted_rate(
    sr: Proportion, excluded: Proportion, withdrawn: Proportion
) -> Proportion:
    """Return the worst-case success rate after exclusion and withdrawal.

    A share ``excluded`` of the sample left before treatment and a share
    ``withdrawn`` of the treated group dropped out; if every one of them
    had failed the rate would drop by at most their sum.
    """
    lost = excluded.value + withdrawn.value
    if lost > 1 + TOLERANCE:
        raise BadAttrition(
            'excluded+withdrawn', f'{lost} exceeds the whole sample'
        )
    return Proportion(_clip(max(sr.value - lost, 0)))


# conditional no-confounding


@public
@dataclass(frozen=True)
class PotentialOutcomeCohort:
    """Binary potential outcomes for every arm, plus optional assignment.

    ``outcomes`` maps an integer arm label to a length-``n`` vector with
    ``None`` where the potential outcome is not specified. Two-arm
    cohorts use label 0 for ``x_j`` and 1 for ``x_k``.
    """

    n: int
    outcomes: Mapping[int, tuple[int | None, ...]]
    assigned: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        """Validate lengths and binary entries."""
        if self.n < 1:
            raise InputValidationError('n', f'{self.n} < 1')
        for arm, vector in self.outcomes.items():
            if len(vector) != self.n:
                raise InputValidationError(
                    f'outcomes.{arm}', f'length {len(vector)} != n={self.n}'
                )
            if any(y not in (0, 1, None) for y in vector):
                raise InputValidationError(
                    f'outcomes.{arm}', 'entries must be 0, 1 or null'
                )
        if self.assigned is not None and len(self.assigned) != self.n:
            raise InputValidationError(
                'assigned', f'length {len(self.assigned)} != n={self.n}'
            )

    @classmethod
    def two_arm(
        cls,
        y_j: Sequence[int],
        y_k: Sequence[int],
        assigned: Sequence[int] | None = None,
    ) -> PotentialOutcomeCohort:
        """Build a cohort for arms ``x_j`` (label 0) and ``x_k`` (label 1)."""
        return cls(
            len(y_j),
            {0: tuple(y_j), 1: tuple(y_k)},
            None if assigned is None else tuple(assigned),
        )

    @property
    def Y_j(self) -> tuple[int | None, ...]:  # noqa: N802
        """Outcomes under ``x_j``."""
        return self.outcomes[0]

    @property
    def Y_k(self) -> tuple[int | None, ...]:  # noqa: N802
        """Outcomes under ``x_k``."""
        return self.outcomes[1]


@public
@dataclass(frozen=True)
class Discrepancy:
    """One tested equality ``left == right``.

    ``shift`` is ``None`` for a marginal check ``E(Y_x) = E(Y | x)``, in
    which case ``condition`` is the arm ``x``; otherwise the check is
    ``E(Y_{x+k} | x) = E(Y | x+k)`` with ``x = condition``, ``k = shift``.
    """

    condition: int
    shift: int | None
    left: Fraction
    right: Fraction
    holds: bool


@public
@dataclass(frozen=True)
class ConfoundingVerdict:
    """Outcome of the marginal and conditional no-confounding checks."""

    marginal_holds: bool
    conditional_holds: bool
    discrepancies: list[Discrepancy] = field(default_factory=list)


def _mean(
    cohort: PotentialOutcomeCohort, arm: int, members: Sequence[int]
) -> Fraction:
    vector = cohort.outcomes.get(arm)
    values = []
    for i in members:
        y = None if vector is None else vector[i]
        if y is None:
            raise MissingPotentialOutcome(
                f'outcomes.{arm}[{i}]',
                f'potential outcome of member {i + 1} under arm {arm} '
                'is required',
            )
        values.append(y)
    return Fraction(sum(values), len(values))


@public
def check_conditional_no_confounding(
    cohort: PotentialOutcomeCohort,
    tolerance: float = DEFAULT_TOLERANCE,
    arms: Sequence[int] | None = None,
) -> ConfoundingVerdict:
    """Test marginal and conditional no-confounding on a synthetic cohort.

    Parameters
    ----------
    cohort
        Potential outcomes with an assignment vector.
    tolerance
        Absolute tolerance for the expectation equalities.
    arms
        Arms whose potential outcomes are evaluated. Defaults to the arms
        whose outcome vectors are fully specified.
    """
    if cohort.assigned is None:
        raise MissingAssignment('assigned', 'the cohort has no assignment')
    if arms is None:
        arms = sorted(
            arm
            for arm, vector in cohort.outcomes.items()
            if all(y is not None for y in vector)
        )
        if not arms:
            raise MissingPotentialOutcome(
                'outcomes', 'no arm has fully specified potential outcomes'
            )
    everyone = range(cohort.n)
    groups: dict[int, list[int]] = {}
    for i, x in enumerate(cohort.assigned):
        groups.setdefault(x, []).append(i)

    checks: list[Discrepancy] = []
    for arm in sorted(arms):
        if arm not in groups:
            logger.debug('arm %d is never assigned; skipped', arm)
            continue
        left = _mean(cohort, arm, everyone)
        right = _mean(cohort, arm, groups[arm])
        checks.append(
            Discrepancy(arm, None, left, right, _close(left, right, tolerance))
        )
    marginal = all(c.holds for c in checks)

    for x in sorted(groups):
        for target in sorted(arms):
            if target == x or target not in groups:
                continue
            left = _mean(cohort, target, groups[x])
            right = _mean(cohort, target, groups[target])
            checks.append(
                Discrepancy(
                    x, target - x, left, right, _close(left, right, tolerance)
                )
            )
    conditional = all(c.holds for c in checks if c.shift is not None)
    return ConfoundingVerdict(marginal, conditional, checks)


def _close(left: Fraction, right: Fraction, tolerance: float) -> bool:
    return abs(float(left - right)) <= tolerance

