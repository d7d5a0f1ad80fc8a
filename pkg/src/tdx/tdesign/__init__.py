"""Temporal-discontinuity design package."""

from .distributions import (
    PresentationCohort,
    QuantileTable,
    TimeWindow,
    TruncatedNormal,
    UniformTime,
)
from .simulation import (
    DesignK,
    InclusionSummary,
    SubsampleDistribution,
    SweepPoint,
    compute_K,
    k_sweep,
    randomized_distribution,
    sample_td_subsample,
    sweep_trend,
    td_distribution,
    td_inclusion_probs,
    td_simulation,
    tv_distance,
)

__all__ = [
    'DesignK',
    'InclusionSummary',
    'PresentationCohort',
    'QuantileTable',
    'SubsampleDistribution',
    'SweepPoint',
    'TimeWindow',
    'TruncatedNormal',
    'UniformTime',
    'compute_K',
    'k_sweep',
    'randomized_distribution',
    'sample_td_subsample',
    'sweep_trend',
    'td_distribution',
    'td_inclusion_probs',
    'td_simulation',
    'tv_distance',
]
