"""Dispatch validated run configurations to the analysis modules."""

from __future__ import annotations

import dataclasses
import logging

from collections.abc import Callable
from typing import Any

from tdx.core import CohortIndex, RatePair, SeededStream, make_proportion
from tdx.errors import ConfigError
from tdx.rdd.simulation import (
    AdversarialCalibration,
    RddScenario,
    calibrate_adversarial,
    conditional_latent_density,
    simulate_rdd,
)
from tdx.reports import Report, Table
from tdx.schema.config import (
    BoundsParams,
    ConfoundingParams,
    KSweepParams,
    OracleParams,
    RddSimParams,
    RunConfig,
    TdSimParams,
    TransportParams,
)
from tdx.sensitivity import (
    PotentialOutcomeCohort,
    alpha_curve,
    alpha_domain,
    attrition_adjusted_rate,
    bounds_unconstrained,
    bounds_with_alpha,
    check_conditional_no_confounding,
    feasible_alpha_domain,
    lower_alpha_domain,
    oracle_bounds,
)
from tdx.tdesign.simulation import (
    compute_K,
    k_sweep,
    randomized_distribution,
    sweep_trend,
    td_simulation,
    tv_distance,
)
from tdx.transport import (
    TransportScenario,
    dominance_check,
    efficiency_ratio,
    min_nstar_for_dominance,
    opposites_cells,
    randomized_cells,
)

logger = logging.getLogger(__name__)


def _bounds_row(
    label: str, rates: RatePair, alpha: float | None
) -> tuple[Any, ...]:
    if alpha is None:
        result = bounds_unconstrained(rates)
    else:
        result = bounds_with_alpha(rates, make_proportion(alpha, 'alpha'))
    return (
        label,
        float(rates.j),
        float(rates.k),
        alpha,
        float(result.U.value),
        float(result.L.value),
    )


def bounds_report(params: BoundsParams, rng: SeededStream) -> Report:
    """Closed-form bounds, their alpha domains and optional extras."""
    rates = RatePair.of(params.rj, params.rk)
    rows = [_bounds_row('observed', rates, params.alpha)]
    if params.excluded or params.withdrawn:
        excluded = make_proportion(params.excluded, 'excluded')
        withdrawn = make_proportion(params.withdrawn, 'withdrawn')
        adjusted = RatePair(
            attrition_adjusted_rate(rates.r_j, excluded, withdrawn),
            attrition_adjusted_rate(rates.r_k, excluded, withdrawn),
        )
        rows.append(_bounds_row('attrition-adjusted', adjusted, None))
    tables = [
        Table.build(
            'bounds', ('rates', 'r_j', 'r_k', 'alpha', 'U', 'L'), rows
        ),
        Table.build(
            'alpha_domain',
            ('domain', 'lo', 'hi'),
            [
                (name, float(d.lo.value), float(d.hi.value))
                for name, d in (
                    ('U', alpha_domain(rates)),
                    ('L', lower_alpha_domain(rates)),
                    ('feasible', feasible_alpha_domain(rates)),
                )
            ],
        ),
    ]
    if params.alpha_grid is not None:
        tables.append(
            Table.build(
                'alpha_curve',
                ('alpha', 'U', 'L'),
                [
                    (float(a), float(b.U.value), float(b.L.value))
                    for a, b in alpha_curve(rates, params.alpha_grid)
                ],
            )
        )
    return Report('bounds', 'Success-rate bounds', tables)


def oracle_report(params: OracleParams, rng: SeededStream) -> Report:
    """Bounds by enumeration of integer response tables."""
    rates = RatePair.of(params.rj, params.rk)
    alpha = (
        None
        if params.alpha is None
        else make_proportion(params.alpha, 'alpha')
    )
    result = oracle_bounds(params.n, rates, alpha, params.cap)
    table = Table.build(
        'oracle',
        ('n', 'r_j', 'r_k', 'alpha', 'U', 'L', 'n_feasible'),
        [
            (
                params.n,
                params.rj,
                params.rk,
                params.alpha,
                result.U.value,
                result.L.value,
                result.n_feasible,
            )
        ],
    )
    return Report('oracle', 'Enumerated success-rate bounds', [table])


def transport_report(params: TransportParams, rng: SeededStream) -> Report:
    """Randomized versus opposites cell sizes over preference fractions."""
    p = make_proportion(params.p, 'p')
    min_nstar = min_nstar_for_dominance(params.n, p)
    n_star = params.n_star or min_nstar
    threshold = Table.build(
        'threshold',
        ('n', 'p', 'min_n_star', 'efficiency_ratio', 'n_star'),
        [
            (
                params.n,
                params.p,
                min_nstar,
                efficiency_ratio(params.n, p),
                n_star,
            )
        ],
    )
    rows = []
    for q in params.qs:
        sc = TransportScenario(params.n, p, make_proportion(q, 'q'), n_star)
        rand = randomized_cells(sc)
        opp = opposites_cells(sc)
        rows.append(
            (
                q,
                'randomized',
                rand.n_jj,
                rand.n_jk,
                rand.n_kj,
                rand.n_kk,
                None,
            )
        )
        rows.append(
            (
                q,
                'opposites',
                None,
                opp.n_jk,
                opp.n_kj,
                None,
                dominance_check(rand, opp),
            )
        )
    cells = Table.build(
        'cells',
        ('q', 'design', 'n_jj', 'n_jk', 'n_kj', 'n_kk', 'dominates'),
        rows,
    )
    return Report(
        'transport', 'Assigning the opposites', [threshold, cells]
    )


def _subset_label(subset: tuple[int, ...], index: CohortIndex) -> str:
    return ','.join(index.label(i) for i in subset)


def td_report(params: TdSimParams, rng: SeededStream) -> Report:
    """K, distance to randomization and inclusion probabilities."""
    cohort = params.cohort
    index = cohort.index
    design = compute_K(cohort)
    distribution, inclusion = td_simulation(
        cohort, params.draws, rng, params.cap
    )
    tables = []
    tv = None
    if distribution is not None:
        uniform = randomized_distribution(cohort.n, cohort.m, params.cap)
        tv = tv_distance(distribution, uniform)
        tables.append(
            Table.build(
                'subsets',
                ('subset', 'td_mass', 'uniform_mass'),
                [
                    (_subset_label(s, index), distribution.mass(s), mass)
                    for s, mass in uniform.masses.items()
                ],
            )
        )
    design_table = Table.build(
        'design',
        (
            'n',
            'm',
            'draws',
            'sigma2_min',
            'length',
            'K',
            'tv_distance',
            'max_inclusion_deviation',
        ),
        [
            (
                cohort.n,
                cohort.m,
                params.draws,
                design.sigma2_min,
                design.length,
                design.K,
                tv,
                inclusion.max_deviation,
            )
        ],
    )
    inclusion_table = Table.build(
        'inclusion',
        ('member', 'probability', 'deviation'),
        [
            (index.label(i), pi, pi - inclusion.p)
            for i, pi in enumerate(inclusion.probs)
        ],
    )
    return Report(
        'td-sim',
        'Temporal-discontinuity simulation',
        [design_table, *tables, inclusion_table],
    )


def k_sweep_report(params: KSweepParams, rng: SeededStream) -> Report:
    """Distance to randomization along a dispersion ladder."""
    points = k_sweep(
        params.cohort, params.sigmas, params.draws, rng, params.cap
    )
    table = Table.build(
        'sweep',
        ('sigma', 'sigma2_min', 'K', 'diagnostic', 'distance'),
        [
            (
                pt.sigma,
                pt.design.sigma2_min,
                pt.design.K,
                pt.diagnostic,
                pt.distance,
            )
            for pt in points
        ],
    )
    return Report(
        'k-sweep',
        'Design parameter sweep',
        [table],
        summary={'spearman': sweep_trend(points)},
    )


def rdd_scenario(
    params: RddSimParams,
) -> tuple[RddScenario, AdversarialCalibration | None]:
    """Resolve the scenario of an ``rdd-sim`` run."""
    if params.scenario is not None:
        return params.scenario, None
    adv = params.adversarial
    if adv is None:
        raise ConfigError('params.adversarial', 'no scenario given')
    calibration = calibrate_adversarial(
        adv.cutoff,
        adv.latent_window,
        adv.noise_scale,
        adv.noise_family,
        magnitude=adv.magnitude,
        baseline=adv.baseline,
        delta=adv.delta,
        grid_points=adv.grid_points,
    )
    return calibration.scenario, calibration


def rdd_report(params: RddSimParams, rng: SeededStream) -> Report:
    """Simulate the population and compare both sides of the cutoff."""
    scenario, calibration = rdd_scenario(params)
    result = simulate_rdd(scenario, params.n_pop, rng)
    fields = dataclasses.asdict(result)
    tables = [Table.build('result', tuple(fields), [tuple(fields.values())])]
    if calibration is not None:
        tables.append(
            Table.build(
                'calibration',
                ('half_width', 'window_integral', 'reweighted_integral'),
                [
                    (
                        calibration.half_width,
                        calibration.window_integral,
                        calibration.reweighted_integral,
                    )
                ],
            )
        )
    return Report('rdd-sim', 'Noise-induced discontinuity', tables)


def density_report(params: RddSimParams) -> Report:
    """Latent-score density given ``Z = density_z`` (default: cutoff)."""
    scenario, _ = rdd_scenario(params)
    z = scenario.cutoff if params.density_z is None else params.density_z
    table = Table.build(
        'density', ('u', 'density'), conditional_latent_density(scenario, z)
    )
    return Report('rdd-sim', f'Latent density given Z = {z}', [table])


def confounding_report(
    params: ConfoundingParams, rng: SeededStream
) -> Report:
    """Marginal and conditional no-confounding checks."""
    arms = sorted(params.outcomes)
    cohort = PotentialOutcomeCohort(
        len(params.outcomes[arms[0]]),
        {arm: tuple(params.outcomes[arm]) for arm in arms},
        None if params.assigned is None else tuple(params.assigned),
    )
    verdict = check_conditional_no_confounding(
        cohort, params.tolerance, params.arms
    )
    tables = [
        Table.build(
            'verdict',
            ('marginal_holds', 'conditional_holds'),
            [(verdict.marginal_holds, verdict.conditional_holds)],
        ),
        Table.build(
            'discrepancies',
            ('check', 'condition', 'shift', 'left', 'right', 'holds'),
            [
                (
                    'marginal' if d.shift is None else 'conditional',
                    d.condition,
                    d.shift,
                    d.left,
                    d.right,
                    d.holds,
                )
                for d in verdict.discrepancies
            ],
        ),
    ]
    return Report('confounding', 'Conditional no-confounding', tables)


BUILDERS: dict[str, Callable[[Any, SeededStream], Report]] = {
    'bounds': bounds_report,
    'oracle': oracle_report,
    'transport': transport_report,
    'td-sim': td_report,
    'k-sweep': k_sweep_report,
    'rdd-sim': rdd_report,
    'confounding': confounding_report,
}


def build_report(run: RunConfig) -> Report:
    """Validate the parameters of ``run`` and compute its report."""
    params = run.command_params()
    logger.info('running %s with seed %d', run.command, run.seed)
    return BUILDERS[run.command](params, SeededStream(run.seed))
