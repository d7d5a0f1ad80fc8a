"""Randomized assignment versus deliberate assignment of the opposites.

A randomized trial of size ``n`` (probability ``p`` for arm ``k``) splits
into four preference-by-assignment cells. The diagonal cells repeat what
an observational study of the general population already shows, so only
the off-diagonal cells ``n_jk`` and ``n_kj`` carry new information. An
opposites design of size ``n_star`` puts every volunteer in one of those
two cells.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from typing import Literal

from public import public

from tdx.core import Proportion
from tdx.errors import InputValidationError, MismatchedQ, MissingNStar
from tdx.utils import nearest_integer

Q_TOLERANCE = 1e-9
CELL_TOLERANCE = 1e-9


@public
@dataclass(frozen=True)
class TransportScenario:
    """Sizes and proportions of the two competing designs."""

    n: int
    p: Proportion
    q: Proportion
    n_star: int | None = None

    def __post_init__(self) -> None:
        """Validate the sample sizes."""
        if self.n < 1:
            raise InputValidationError('n', f'{self.n} < 1')
        if self.n_star is not None and self.n_star < 1:
            raise InputValidationError('n_star', f'{self.n_star} < 1')


@public
@dataclass(frozen=True)
class CellSizes:
    """Expected counts per preference (first) by assignment (second) cell.

    ``n_jj`` and ``n_kk`` are ``None`` for the opposites design, whose
    diagonal cells come from an external observational study.
    """

    design: Literal['randomized', 'opposites']
    q: float
    n_jk: float
    n_kj: float
    n_jj: float | None = None
    n_kk: float | None = None

    @property
    def diagonal_external(self) -> bool:
        """Whether the diagonal cells are supplied by observational data."""
        return self.design == 'opposites'

    @property
    def total(self) -> float:
        """Trial participants across the cells held by this design."""
        return sum(
            c
            for c in (self.n_jj, self.n_jk, self.n_kj, self.n_kk)
            if c is not None
        )


@public
def randomized_cells(sc: TransportScenario) -> CellSizes:
    """Split a randomized trial by preference and assigned arm."""
    p, q, n = float(sc.p), float(sc.q), sc.n
    return CellSizes(
        design='randomized',
        q=q,
        n_jj=(1 - p) * (1 - q) * n,
        n_jk=(1 - p) * q * n,
        n_kj=p * (1 - q) * n,
        n_kk=p * q * n,
    )


@public
def opposites_cells(sc: TransportScenario) -> CellSizes:
    """Cells of the design that assigns everyone their non-preferred arm.

    Raises
    ------
    MissingNStar
        When the scenario has no ``n_star``.
    """
    if sc.n_star is None:
        raise MissingNStar('n_star', 'the opposites design needs n_star')
    q = float(sc.q)
    return CellSizes(
        design='opposites',
        q=q,
        n_jk=q * sc.n_star,
        n_kj=(1 - q) * sc.n_star,
    )


@public
def min_nstar_for_dominance(n: int, p: Proportion) -> int:
    """Return the smallest integer strictly above ``max{p, 1 - p} * n``."""
    if n < 1:
        raise InputValidationError('n', f'{n} < 1')
    threshold = max(float(p), 1 - float(p)) * n
    exact = nearest_integer(threshold)
    if exact is not None:
        return exact + 1
    return math.floor(threshold) + 1


@public
def dominance_check(randomized: CellSizes, opposites: CellSizes) -> bool:
    """Whether the opposites design has at least the informative cells.

    Equality counts as dominance ("equal or more power").

    Raises
    ------
    MismatchedQ
        When the two tables were computed with different ``q``.
    """
    if abs(randomized.q - opposites.q) > Q_TOLERANCE:
        raise MismatchedQ(
            'q',
            f'randomized q={randomized.q} differs from opposites '
            f'q={opposites.q}',
        )
    return (
        opposites.n_jk >= randomized.n_jk - CELL_TOLERANCE
        and opposites.n_kj >= randomized.n_kj - CELL_TOLERANCE
    )


@public
def efficiency_ratio(n: int, p: Proportion) -> float:
    """Return ``min n_star / n``, the recruitment needed relative to ``n``."""
    return min_nstar_for_dominance(n, p) / n
