"""Outcome-probability profiles over the latent score.

A profile maps a latent score ``u`` to a baseline outcome probability or
to an individual treatment effect on that probability.
"""

from __future__ import annotations

import abc

from typing import Annotated, Literal, Union

import numpy as np

from numpy.typing import NDArray
from public import public
from pydantic import BaseModel, ConfigDict, Field, model_validator

FloatArray = NDArray[np.float64]


class _Profile(BaseModel, abc.ABC):
    model_config = ConfigDict(extra='forbid', frozen=True)

    @abc.abstractmethod
    def __call__(self, u: FloatArray) -> FloatArray:
        """Evaluate the profile at latent scores ``u``."""


@public
class Constant(_Profile):
    """The same value everywhere."""

    kind: Literal['constant'] = 'constant'
    value: float

    def __call__(self, u: FloatArray) -> FloatArray:
        """Broadcast ``value``."""
        return np.full(np.shape(u), self.value, dtype=np.float64)


@public
class Linear(_Profile):
    """``intercept + slope * (u - anchor)``."""

    kind: Literal['linear'] = 'linear'
    intercept: float
    slope: float
    anchor: float = 0.0

    def __call__(self, u: FloatArray) -> FloatArray:
        """Evaluate the line."""
        return self.intercept + self.slope * (np.asarray(u) - self.anchor)


@public
class StepFunction(_Profile):
    """Piecewise-constant bands.

    ``values[i]`` applies on ``[edges[i], edges[i + 1])``; ``outside``
    applies below the first and from the last edge on.
    """

    kind: Literal['bands'] = 'bands'
    edges: list[float] = Field(min_length=2)
    values: list[float]
    outside: float = 0.0

    @model_validator(mode='after')
    def _shape(self) -> StepFunction:
        if len(self.values) != len(self.edges) - 1:
            raise ValueError(
                f'{len(self.values)} values for {len(self.edges) - 1} bands'
            )
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError('edges must be strictly increasing')
        return self

    def __call__(self, u: FloatArray) -> FloatArray:
        """Look up the band of every score."""
        u = np.asarray(u, dtype=np.float64)
        band = np.searchsorted(self.edges, u, side='right') - 1
        inside = (band >= 0) & (band < len(self.values))
        table = np.asarray(self.values, dtype=np.float64)
        out = np.full(u.shape, self.outside, dtype=np.float64)
        out[inside] = table[band[inside]]
        return out


Profile = Annotated[
    Union[Constant, Linear, StepFunction], Field(discriminator='kind')
]
