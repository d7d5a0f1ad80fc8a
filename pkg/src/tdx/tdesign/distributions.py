"""Presentation-time distributions and cohorts.

Every member of a clinical sample presents at a random time with
continuous support on the study window ``[t_s, t_e]``. Members are
independent but not identically distributed.
"""

from __future__ import annotations

import abc
import math

from typing import Annotated, Literal, Union

import numpy as np

from numpy.typing import NDArray
from public import public
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    model_validator,
)
from scipy import integrate, stats

from tdx.core import CohortIndex
from tdx.errors import CohortError, InputValidationError, VarianceUnavailable
from tdx.utils import nearest_integer

QUAD_TOLERANCE = 1e-8
SUPPORT_TOLERANCE = 1e-9

FloatArray = NDArray[np.float64]


class _Frozen(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


@public
class TimeWindow(_Frozen):
    """Study period ``[t_s, t_e]`` in study time units."""

    t_s: float
    t_e: float

    @model_validator(mode='after')
    def _ordered(self) -> TimeWindow:
        if not self.t_s < self.t_e:
            raise ValueError(f't_s={self.t_s} must be below t_e={self.t_e}')
        return self

    @property
    def length(self) -> float:
        """Return ``t_e - t_s``."""
        return self.t_e - self.t_s


class PresentationTime(_Frozen, abc.ABC):
    """Base class for a member's presentation-time distribution."""

    @abc.abstractmethod
    def ppf(self, u: FloatArray, window: TimeWindow) -> FloatArray:
        """Map uniform draws to presentation times."""

    @abc.abstractmethod
    def variance(self, window: TimeWindow) -> float:
        """Return the variance of the presentation time on ``window``."""

    @abc.abstractmethod
    def support(self, window: TimeWindow) -> tuple[float, float]:
        """Return the support of the presentation time."""

    def with_dispersion(
        self, sigma: float, window: TimeWindow
    ) -> PresentationTime:
        """Rebuild the distribution with dispersion parameter ``sigma``."""
        raise CohortError(
            'family',
            f'{type(self).__name__} has no dispersion parameter to sweep',
        )


@public
class TruncatedNormal(PresentationTime):
    """Normal presentation time truncated to the study window.

    ``sd`` is the pre-truncation standard deviation.
    """

    family: Literal['truncated-normal'] = 'truncated-normal'
    mean: float
    sd: PositiveFloat

    def _frozen(self, window: TimeWindow) -> stats.rv_continuous:
        a = (window.t_s - self.mean) / self.sd
        b = (window.t_e - self.mean) / self.sd
        return stats.truncnorm(a, b, loc=self.mean, scale=self.sd)

    def ppf(self, u: FloatArray, window: TimeWindow) -> FloatArray:
        """Map uniform draws through the truncated quantile function."""
        return np.asarray(self._frozen(window).ppf(u), dtype=np.float64)

    def variance(self, window: TimeWindow) -> float:
        """Return the post-truncation variance."""
        return float(self._frozen(window).var())

    def support(self, window: TimeWindow) -> tuple[float, float]:
        """Return the window itself."""
        return window.t_s, window.t_e

    def with_dispersion(
        self, sigma: float, window: TimeWindow
    ) -> TruncatedNormal:
        """Keep the mean, replace the standard deviation."""
        return TruncatedNormal(mean=self.mean, sd=sigma)


@public
class UniformTime(PresentationTime):
    """Uniform presentation time on ``[lo, hi]``."""

    family: Literal['uniform'] = 'uniform'
    lo: float
    hi: float

    @model_validator(mode='after')
    def _ordered(self) -> UniformTime:
        if not self.lo < self.hi:
            raise ValueError(f'lo={self.lo} must be below hi={self.hi}')
        return self

    def ppf(self, u: FloatArray, window: TimeWindow) -> FloatArray:
        """Scale uniform draws onto ``[lo, hi]``."""
        return self.lo + (self.hi - self.lo) * u

    def variance(self, window: TimeWindow) -> float:
        """Return ``(hi - lo)^2 / 12``."""
        return (self.hi - self.lo) ** 2 / 12

    def support(self, window: TimeWindow) -> tuple[float, float]:
        """Return ``(lo, hi)``."""
        return self.lo, self.hi

    def with_dispersion(self, sigma: float, window: TimeWindow) -> UniformTime:
        """Keep the midpoint, set the standard deviation to ``sigma``.

        The interval is clipped to the window.
        """
        center = (self.lo + self.hi) / 2
        half = sigma * math.sqrt(3)
        return UniformTime(
            lo=max(center - half, window.t_s),
            hi=min(center + half, window.t_e),
        )


@public
class QuantileTable(PresentationTime):
    """Piecewise-linear quantile function through ``(probs, values)``."""

    family: Literal['quantile-table'] = 'quantile-table'
    probs: list[float]
    values: list[float]

    @model_validator(mode='after')
    def _shape(self) -> QuantileTable:
        if len(self.probs) < 2 or len(self.probs) != len(self.values):
            raise ValueError(
                'probs and values need the same length, at least 2; got '
                f'{len(self.probs)} and {len(self.values)}'
            )
        return self

    def _check(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        problem = None
        if not (np.isfinite(probs).all() and np.isfinite(values).all()):
            problem = 'entries must be finite'
        elif probs[0] != 0 or probs[-1] != 1:
            problem = 'probs must start at 0 and end at 1'
        elif np.any(np.diff(probs) <= 0) or np.any(np.diff(values) <= 0):
            problem = 'probs and values must be strictly increasing'
        if problem is not None:
            raise VarianceUnavailable('quantile-table', problem)

    def _quantile(self, u: FloatArray | float) -> FloatArray:
        return np.interp(u, self.probs, self.values)

    def ppf(self, u: FloatArray, window: TimeWindow) -> FloatArray:
        """Interpolate the quantile table."""
        self._check()
        return self._quantile(u)

    def variance(self, window: TimeWindow) -> float:
        """Integrate the quantile function numerically."""
        self._check()
        inner = self.probs[1:-1] or None
        mean, _ = integrate.quad(
            lambda x: float(self._quantile(x)),
            0.0,
            1.0,
            points=inner,
            epsabs=QUAD_TOLERANCE,
            limit=200,
        )
        second, _ = integrate.quad(
            lambda x: float(self._quantile(x)) ** 2,
            0.0,
            1.0,
            points=inner,
            epsabs=QUAD_TOLERANCE,
            limit=200,
        )
        return max(second - mean**2, 0.0)

    def support(self, window: TimeWindow) -> tuple[float, float]:
        """Return the first and last tabulated values."""
        return self.values[0], self.values[-1]


Member = Annotated[
    Union[TruncatedNormal, UniformTime, QuantileTable],
    Field(discriminator='family'),
]


@public
class PresentationCohort(_Frozen):
    """Clinical sample with per-member presentation-time distributions.

    The temporally latter ``m = p * n`` members are treated. ``labels``
    optionally names the members in reports; they default to ``1..n``.
    """

    window: TimeWindow
    members: list[Member] = Field(min_length=2)
    p: float = Field(ge=0.0, le=1.0)
    labels: list[str] | None = None

    @model_validator(mode='after')
    def _consistent(self) -> PresentationCohort:
        m = nearest_integer(self.p * len(self.members))
        if m is None or m < 1:
            raise ValueError(
                f'p * n = {self.p * len(self.members)} must be a positive '
                'integer'
            )
        for i, member in enumerate(self.members):
            lo, hi = member.support(self.window)
            if (
                lo < self.window.t_s - SUPPORT_TOLERANCE
                or hi > self.window.t_e + SUPPORT_TOLERANCE
            ):
                raise ValueError(
                    f'members[{i}] support [{lo}, {hi}] leaves the window'
                )
        if self.labels is not None:
            try:
                CohortIndex(self.n, tuple(self.labels))
            except InputValidationError as exc:
                raise ValueError(str(exc)) from exc
        return self

    @property
    def n(self) -> int:
        """Number of members."""
        return len(self.members)

    @property
    def m(self) -> int:
        """Size of the treated subsample."""
        return int(round(self.p * self.n))

    @property
    def index(self) -> CohortIndex:
        """Member identifiers of the cohort."""
        labels = None if self.labels is None else tuple(self.labels)
        return CohortIndex(self.n, labels)

    def with_dispersion(self, sigma: float) -> PresentationCohort:
        """Rebuild every member with the common dispersion ``sigma``."""
        return PresentationCohort(
            window=self.window,
            members=[
                member.with_dispersion(sigma, self.window)
                for member in self.members
            ],
            p=self.p,
            labels=self.labels,
        )

    def draw_times(self, gen: np.random.Generator, size: int) -> FloatArray:
        """Draw ``size`` independent rows of presentation times."""
        u = gen.random((size, self.n))
        times = np.empty_like(u)
        for i, member in enumerate(self.members):
            times[:, i] = member.ppf(u[:, i], self.window)
        return times
