"""Monte Carlo for discontinuity designs driven by measurement noise.

The running variable is ``Z = U + eps`` with latent score ``U ~ h`` and
exogenous noise ``eps ~ g``; individuals with ``Z >= c`` are treated.
Among individuals whose ``Z`` lands near the cutoff, the latent scores
follow a density proportional to ``h(u) g(u - c)``, so the comparison
across the cutoff estimates a ``g``-reweighted average effect rather than
the average effect over any latent-score window. Uniform noise is the
exception.
"""

from __future__ import annotations

import logging
import math

from dataclasses import dataclass
from typing import Literal

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
from scipy import integrate, optimize

from tdx.core import SeededStream
from tdx.errors import (
    CalibrationFailed,
    DegenerateWindow,
    InputValidationError,
    ScenarioError,
    ZeroMass,
)
from tdx.rdd.densities import LatentDensity, Noise, UniformLatent
from tdx.rdd.profiles import Constant, Profile, StepFunction

logger = logging.getLogger(__name__)

BATCH_SIZE = 1_000_000
MIN_POPULATION = 1000
DENSITY_TOLERANCE = 1e-6
PROBABILITY_TOLERANCE = 1e-12
CALIBRATION_TOLERANCE = 1e-6
CALIBRATION_MAXITER = 200
# latent support beyond the window, in gaussian noise standard deviations
ADVERSARIAL_REACH = 8.0

FloatArray = NDArray[np.float64]


def _check_probabilities(
    base: FloatArray, treated: FloatArray, field: str
) -> None:
    for name, values in (('baseline', base), (field, treated)):
        if values.size and (
            values.min() < -PROBABILITY_TOLERANCE
            or values.max() > 1 + PROBABILITY_TOLERANCE
        ):
            raise ScenarioError(
                name,
                f'outcome probabilities span [{values.min():.6g}, '
                f'{values.max():.6g}], outside [0, 1]',
            )


@public
class RddScenario(BaseModel):
    """Population, noise and outcome model of a discontinuity design.

    Attributes
    ----------
    cutoff
        Treatment goes to ``Z >= cutoff``.
    delta
        Half-width of the running-variable window ``|Z - c| < delta``.
    latent_window
        Latent-score interval whose average effect is reported; defaults
        to ``(c - delta, c + delta)``.
    grid_points
        Resolution of every grid integral.
    """

    model_config = ConfigDict(extra='forbid', frozen=True)

    cutoff: float
    delta: PositiveFloat
    latent: LatentDensity
    noise: Noise
    effect: Profile = Constant(value=0.0)
    baseline: Profile = Constant(value=0.5)
    latent_window: tuple[float, float] | None = None
    grid_points: int = Field(default=2001, ge=3)

    @model_validator(mode='after')
    def _consistent(self) -> RddScenario:
        lo, hi = self.window
        if not lo < hi:
            raise ValueError(f'latent_window ({lo}, {hi}) is empty')
        for name, density in (('latent', self.latent), ('noise', self.noise)):
            grid = density.grid(self.grid_points)
            mass = float(integrate.trapezoid(density.pdf(grid), grid))
            if abs(mass - 1) > DENSITY_TOLERANCE:
                raise ScenarioError(name, f'density integrates to {mass}')
        grid = self.latent.grid(self.grid_points)
        base = self.baseline(grid)
        _check_probabilities(base, base + self.effect(grid), 'effect')
        return self

    @property
    def window(self) -> tuple[float, float]:
        """Latent window used for the true average effect."""
        if self.latent_window is not None:
            return self.latent_window
        return self.cutoff - self.delta, self.cutoff + self.delta


@public
@dataclass(frozen=True)
class RddResult:
    """Summary of one simulated population.

    ``rate_above`` is the outcome rate of the treated side
    (``c <= Z < c + delta``) and ``rate_below`` that of the untreated
    side.
    """

    window_estimate: float
    true_window_ate: float
    rate_above: float
    rate_below: float
    mc_se: float
    n_window: int
    n_above: int
    n_below: int
    n_latent_window: int
    n_pop: int
    warning: str | None = None


@dataclass
class _Tally:
    n_above: int = 0
    n_below: int = 0
    y_above: int = 0
    y_below: int = 0
    n_latent: int = 0
    effect_sum: float = 0.0


@public
def simulate_rdd(
    sc: RddScenario,
    n_pop: int,
    rng: SeededStream,
    batch_size: int = BATCH_SIZE,
) -> RddResult:
    """Simulate ``n_pop`` individuals and compare outcomes at the cutoff.

    Batch ``b`` draws latent scores, noise and outcome uniforms, in that
    order, from ``rng.generator(b)``.

    Raises
    ------
    DegenerateWindow
        When a side of the running-variable window or the latent window
        holds nobody.
    ScenarioError
        When a simulated outcome probability leaves ``[0, 1]``.
    """
    if n_pop < 1:
        raise InputValidationError('n_pop', f'{n_pop} < 1')
    warning = None
    if n_pop < MIN_POPULATION:
        warning = f'n_pop={n_pop} < {MIN_POPULATION}; mc_se is unreliable'
        logger.warning(warning)
    lo, hi = sc.window
    tally = _Tally()
    for b, start in enumerate(range(0, n_pop, batch_size)):
        size = min(batch_size, n_pop - start)
        gen = rng.generator(b)
        u = sc.latent.sample(gen, size)
        z = u + sc.noise.sample(gen, size)
        treated = z >= sc.cutoff
        effect = sc.effect(u)
        base = sc.baseline(u)
        _check_probabilities(base, base + effect, 'effect')
        y = gen.random(size) < base + np.where(treated, effect, 0.0)

        near = np.abs(z - sc.cutoff) < sc.delta
        above = near & treated
        below = near & ~treated
        tally.n_above += int(above.sum())
        tally.n_below += int(below.sum())
        tally.y_above += int(y[above].sum())
        tally.y_below += int(y[below].sum())

        latent = (u >= lo) & (u <= hi)
        tally.n_latent += int(latent.sum())
        tally.effect_sum += float(effect[latent].sum())
        logger.debug('batch %d: %d individuals', b, start + size)

    if tally.n_above == 0 or tally.n_below == 0:
        raise DegenerateWindow(
            'delta',
            f'{tally.n_above} treated and {tally.n_below} untreated '
            f'individuals within {sc.delta} of the cutoff',
        )
    if tally.n_latent == 0:
        raise DegenerateWindow(
            'latent_window', f'no latent score in ({lo}, {hi})'
        )
    rate_above = tally.y_above / tally.n_above
    rate_below = tally.y_below / tally.n_below
    mc_se = math.sqrt(
        rate_above * (1 - rate_above) / tally.n_above
        + rate_below * (1 - rate_below) / tally.n_below
    )
    return RddResult(
        window_estimate=rate_above - rate_below,
        true_window_ate=tally.effect_sum / tally.n_latent,
        rate_above=rate_above,
        rate_below=rate_below,
        mc_se=mc_se,
        n_window=tally.n_above + tally.n_below,
        n_above=tally.n_above,
        n_below=tally.n_below,
        n_latent_window=tally.n_latent,
        n_pop=n_pop,
        warning=warning,
    )


@public
def latent_grid(sc: RddScenario, z: float) -> FloatArray:
    """Grid covering the support of ``h(u) g(u - z)``."""
    noise_lo, noise_hi = sc.noise.support()
    latent_lo, latent_hi = sc.latent.support()
    lo = max(z + noise_lo, latent_lo)
    hi = min(z + noise_hi, latent_hi)
    if not lo < hi:
        raise ZeroMass('z', f'no latent score can be measured as {z}')
    return np.linspace(lo, hi, sc.grid_points)


@public
def conditional_latent_density(
    sc: RddScenario, z: float, grid: FloatArray | None = None
) -> list[tuple[float, float]]:
    """Density of the latent score given ``Z = z`` on ``grid``.

    The product ``h(u) g(u - z)`` is normalised by the trapezoid rule on
    the grid itself. Without a grid, :func:`latent_grid` is used.

    Raises
    ------
    ZeroMass
        When the product vanishes on the whole grid.
    """
    if grid is None:
        grid = latent_grid(sc, z)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise InputValidationError(
            'grid', 'needs at least two strictly increasing points'
        )
    values = sc.latent.pdf(grid) * sc.noise.pdf(grid - z)
    mass = float(integrate.trapezoid(values, grid))
    if not math.isfinite(mass) or mass <= 0:
        raise ZeroMass('grid', f'h(u) g(u - {z}) vanishes on the grid')
    return [(float(u), float(d)) for u, d in zip(grid, values / mass)]


@public
@dataclass(frozen=True)
class AdversarialCalibration:
    """Calibrated adversarial scenario and its defining integrals."""

    scenario: RddScenario
    half_width: float
    window_integral: float
    reweighted_integral: float


@public
def calibrate_adversarial(
    c: float,
    latent_window: tuple[float, float],
    noise_scale: float,
    noise_family: Literal['gaussian', 'uniform'] = 'gaussian',
    magnitude: float = 0.1,
    baseline: float = 0.5,
    delta: float | None = None,
    grid_points: int = 2001,
) -> AdversarialCalibration:
    """Build effects that vanish on average but not near the cutoff.

    The latent score is uniform on ``[c - R, c + R]`` with ``R`` the
    larger window half plus the noise reach. The effect is
    ``+magnitude`` on a central band ``[c - w, c + w)`` and
    ``-magnitude`` on the rest of the latent window, with ``w`` found by
    root-finding so that both bands carry the same latent mass. Gaussian
    noise over-samples the central band, so the reweighted integral
    ``int effect(u) h(u) g(u - c) du`` must come out positive.

    Raises
    ------
    ScenarioError
        When the latent window does not contain ``c``.
    CalibrationFailed
        When the noise is too small to resolve or the root-find fails.
    """
    a, b = latent_window
    if not a < c < b:
        raise ScenarioError(
            'latent_window', f'({a}, {b}) does not contain the cutoff {c}'
        )
    if noise_scale <= 0:
        raise CalibrationFailed(
            'noise_scale',
            'without noise the assignment is deterministic in the latent '
            'score',
        )
    resolution = (b - a) / (grid_points - 1)
    if noise_scale < resolution:
        raise CalibrationFailed(
            'noise_scale',
            f'{noise_scale} is below the grid resolution {resolution}',
        )
    noise = Noise(family=noise_family, scale=noise_scale)
    extra = noise_scale
    if noise_family == 'gaussian':
        extra = ADVERSARIAL_REACH * noise_scale
    reach = max(c - a, b - c) + extra
    latent = UniformLatent(lo=c - reach, hi=c + reach)

    def mass(lo: float, hi: float) -> float:
        return float(latent.cdf(hi) - latent.cdf(lo))

    total = mass(a, b)

    def imbalance(w: float) -> float:
        return 2 * mass(max(c - w, a), min(c + w, b)) - total

    try:
        w, info = optimize.brentq(
            imbalance,
            0.0,
            max(c - a, b - c),
            maxiter=CALIBRATION_MAXITER,
            full_output=True,
        )
    except (RuntimeError, ValueError) as exc:
        raise CalibrationFailed('latent_window', str(exc)) from exc
    window_integral = magnitude * imbalance(w)
    if not info.converged or abs(imbalance(w)) > CALIBRATION_TOLERANCE:
        raise CalibrationFailed(
            'latent_window',
            f'band half-width did not converge (imbalance {imbalance(w)})',
        )

    edges = [a]
    values: list[float] = []
    for edge, value in (
        (max(c - w, a), -magnitude),
        (min(c + w, b), magnitude),
        (b, -magnitude),
    ):
        if edge > edges[-1]:
            edges.append(edge)
            values.append(value)
    effect = StepFunction(edges=edges, values=values)

    grid = np.linspace(a, b, grid_points)
    reweighted = float(
        integrate.trapezoid(
            effect(grid) * latent.pdf(grid) * noise.pdf(grid - c), grid
        )
    )
    if noise_family == 'gaussian' and reweighted <= 0:
        raise CalibrationFailed(
            'noise_scale',
            f'reweighted effect {reweighted} is not positive',
        )
    scenario = RddScenario(
        cutoff=c,
        delta=noise_scale / 5 if delta is None else delta,
        latent=latent,
        noise=noise,
        effect=effect,
        baseline=Constant(value=baseline),
        latent_window=(a, b),
        grid_points=grid_points,
    )
    logger.info(
        'calibrated band half-width %g, reweighted effect %g', w, reweighted
    )
    return AdversarialCalibration(
        scenario=scenario,
        half_width=float(w),
        window_integral=window_integral,
        reweighted_integral=reweighted,
    )


@public
def adversarial_scenario(
    c: float,
    latent_window: tuple[float, float],
    noise_scale: float,
    noise_family: Literal['gaussian', 'uniform'] = 'gaussian',
) -> RddScenario:
    """Return the calibrated scenario of :func:`calibrate_adversarial`."""
    return calibrate_adversarial(
        c, latent_window, noise_scale, noise_family
    ).scenario
