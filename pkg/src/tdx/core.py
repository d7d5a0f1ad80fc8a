"""Domain types shared by every tdx module.

Rates are stored either as binary floats, compared with a ``1e-12``
tolerance, or as :class:`fractions.Fraction` for exact oracle work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from public import public

from tdx.errors import EmptyTable, InputValidationError, OutOfRange
from tdx.utils import TOLERANCE, Number

UINT64_MAX = 2**64 - 1


@public
@dataclass(frozen=True)
class Proportion:
    """A real number in ``[0, 1]``."""

    value: Number

    def __post_init__(self) -> None:
        """Reject values outside the unit interval."""
        if isinstance(self.value, bool) or not isinstance(
            self.value, (int, float, Fraction)
        ):
            raise OutOfRange('value', f'{self.value!r} is not a number')
        if not 0 <= self.value <= 1:
            raise OutOfRange('value', f'{self.value} is outside [0, 1]')

    def __float__(self) -> float:
        """Return the value as a float."""
        return float(self.value)


@public
def make_proportion(x: Number | int, name: str = 'value') -> Proportion:
    """Build a :class:`Proportion`, naming ``name`` on rejection."""
    try:
        return Proportion(x)
    except OutOfRange as exc:
        raise OutOfRange(name, exc.message) from exc


@public
@dataclass(frozen=True)
class RatePair:
    """Observed success rates of a two-arm study."""

    r_j: Proportion
    r_k: Proportion

    @classmethod
    def of(cls, r_j: Number | int, r_k: Number | int) -> RatePair:
        """Build a pair from plain numbers."""
        return cls(make_proportion(r_j, 'r_j'), make_proportion(r_k, 'r_k'))

    @property
    def j(self) -> Number:
        """Success rate under treatment ``x_j``."""
        return self.r_j.value

    @property
    def k(self) -> Number:
        """Success rate under treatment ``x_k``."""
        return self.r_k.value

    def swapped(self) -> RatePair:
        """Exchange the roles of the two arms."""
        return RatePair(self.r_k, self.r_j)

    def complemented(self) -> RatePair:
        """Return the failure rates ``(1 - r_j, 1 - r_k)``."""
        return RatePair.of(1 - self.j, 1 - self.k)


@public
@dataclass(frozen=True)
class ResponseTable:
    """Joint distribution of the two binary potential outcomes.

    Attributes
    ----------
    s
        Both arms respond.
    t
        Neither arm responds.
    u
        Only ``x_k`` responds.
    v
        Only ``x_j`` responds.
    """

    s: Proportion
    t: Proportion
    u: Proportion
    v: Proportion

    def __post_init__(self) -> None:
        """Check that the four cells form a distribution."""
        total = self.s.value + self.t.value + self.u.value + self.v.value
        if abs(total - 1) > TOLERANCE:
            raise InputValidationError(
                'response_table', f'cells sum to {total}, not 1'
            )

    @property
    def r_k(self) -> Number:
        """Success rate under ``x_k``."""
        return self.s.value + self.u.value

    @property
    def r_j(self) -> Number:
        """Success rate under ``x_j``."""
        return self.s.value + self.v.value

    @property
    def alpha(self) -> Number:
        """Proportion of individuals whose potential outcomes differ."""
        return self.u.value + self.v.value

    @property
    def rates(self) -> RatePair:
        """Observed rates implied by the table."""
        return RatePair.of(min(self.r_j, 1), min(self.r_k, 1))


@public
def response_table_from_counts(
    S: int, T: int, U: int, V: int
) -> ResponseTable:
    """Normalise integer counts ``(S, T, U, V)`` into an exact table."""
    counts = {'S': S, 'T': T, 'U': U, 'V': V}
    for name, count in counts.items():
        if isinstance(count, bool) or not isinstance(count, int):
            raise InputValidationError(name, f'{count!r} is not an integer')
        if count < 0:
            raise InputValidationError(name, f'{count} is negative')
    total = S + T + U + V
    if total == 0:
        raise EmptyTable('counts', 'S + T + U + V is 0')
    return ResponseTable(
        Proportion(Fraction(S, total)),
        Proportion(Fraction(T, total)),
        Proportion(Fraction(U, total)),
        Proportion(Fraction(V, total)),
    )


@public
@dataclass(frozen=True)
class CohortIndex:
    """Size and optional identifiers of a clinical sample."""

    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        """Validate the size and identifiers."""
        if self.n < 1:
            raise InputValidationError('n', f'{self.n} < 1')
        if self.labels is None:
            return
        if len(self.labels) != self.n:
            raise InputValidationError(
                'labels', f'{len(self.labels)} labels for {self.n} members'
            )
        if len(set(self.labels)) != self.n:
            raise InputValidationError('labels', 'duplicate identifiers')

    def label(self, index: int) -> str:
        """Return the identifier of a 0-based member index."""
        if self.labels is None:
            return str(index + 1)
        return self.labels[index]


@public
@dataclass(frozen=True)
class SeededStream:
    """Address of a reproducible stream of pseudo-random numbers.

    Generators are numpy PCG64 instances seeded from
    ``SeedSequence(seed, spawn_key=(stream_id, *path, *extra))``.
    """

    seed: int = 0
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        """Keep both identifiers in the unsigned 64-bit range."""
        for name in ('seed', 'stream_id'):
            value = getattr(self, name)
            if not 0 <= value <= UINT64_MAX:
                raise InputValidationError(
                    name, f'{value} is not a 64-bit unsigned integer'
                )

    def child(self, index: int) -> SeededStream:
        """Return an independent sub-stream."""
        return SeededStream(self.seed, self.stream_id, (*self.path, index))

    def generator(self, *extra: int) -> np.random.Generator:
        """Create the generator for this address (plus ``extra`` keys)."""
        sequence = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.stream_id, *self.path, *extra),
        )
        return np.random.Generator(np.random.PCG64(sequence))
