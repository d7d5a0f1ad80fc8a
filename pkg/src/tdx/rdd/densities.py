"""Latent-score and measurement-noise densities.

Both families wrap frozen :mod:`scipy.stats` distributions so sampling,
densities and CDFs come from one place.
"""

from __future__ import annotations

import abc

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
from scipy import stats

FloatArray = NDArray[np.float64]

# effective support of a gaussian, in standard deviations
GAUSSIAN_REACH = 10.0


class _Density(BaseModel, abc.ABC):
    model_config = ConfigDict(extra='forbid', frozen=True)

    @abc.abstractmethod
    def frozen(self) -> stats.rv_continuous:
        """Return the frozen scipy distribution."""

    @abc.abstractmethod
    def support(self) -> tuple[float, float]:
        """Interval holding (effectively) all of the mass."""

    def pdf(self, x: FloatArray) -> FloatArray:
        """Evaluate the density."""
        return np.asarray(self.frozen().pdf(x), dtype=np.float64)

    def cdf(self, x: FloatArray | float) -> FloatArray:
        """Evaluate the cumulative distribution function."""
        return np.asarray(self.frozen().cdf(x), dtype=np.float64)

    def sample(self, gen: np.random.Generator, size: int) -> FloatArray:
        """Draw ``size`` values from ``gen``."""
        return np.asarray(
            self.frozen().rvs(size=size, random_state=gen), dtype=np.float64
        )

    def grid(self, points: int) -> FloatArray:
        """Evenly spaced points over :meth:`support`."""
        lo, hi = self.support()
        return np.linspace(lo, hi, points)


@public
class GaussianLatent(_Density):
    """Normal latent score."""

    family: Literal['gaussian'] = 'gaussian'
    mean: float
    sd: PositiveFloat

    def frozen(self) -> stats.rv_continuous:
        """Return ``norm(mean, sd)``."""
        return stats.norm(loc=self.mean, scale=self.sd)

    def support(self) -> tuple[float, float]:
        """Return ``mean +/- 10 sd``."""
        reach = GAUSSIAN_REACH * self.sd
        return self.mean - reach, self.mean + reach


@public
class UniformLatent(_Density):
    """Uniform latent score on ``[lo, hi]``."""

    family: Literal['uniform'] = 'uniform'
    lo: float
    hi: float

    @model_validator(mode='after')
    def _ordered(self) -> UniformLatent:
        if not self.lo < self.hi:
            raise ValueError(f'lo={self.lo} must be below hi={self.hi}')
        return self

    def frozen(self) -> stats.rv_continuous:
        """Return ``uniform(lo, hi - lo)``."""
        return stats.uniform(loc=self.lo, scale=self.hi - self.lo)

    def support(self) -> tuple[float, float]:
        """Return ``(lo, hi)``."""
        return self.lo, self.hi


@public
class Noise(_Density):
    """Centred measurement error.

    ``scale`` is the standard deviation of gaussian noise and the
    half-width of uniform noise.
    """

    family: Literal['gaussian', 'uniform'] = 'gaussian'
    scale: PositiveFloat

    def frozen(self) -> stats.rv_continuous:
        """Return the centred scipy distribution."""
        if self.family == 'uniform':
            return stats.uniform(loc=-self.scale, scale=2 * self.scale)
        return stats.norm(loc=0.0, scale=self.scale)

    def support(self) -> tuple[float, float]:
        """Return ``+/- scale`` (uniform) or ``+/- 10 scale`` (gaussian)."""
        reach = self.reach()
        return -reach, reach

    def reach(self) -> float:
        """Half-width of the effective support."""
        if self.family == 'uniform':
            return self.scale
        return GAUSSIAN_REACH * self.scale


LatentDensity = Annotated[
    Union[GaussianLatent, UniformLatent], Field(discriminator='family')
]
