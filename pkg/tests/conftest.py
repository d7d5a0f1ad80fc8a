"""Pytest configuration for the tdx package tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from typer.testing import CliRunner

from tdx.core import RatePair, SeededStream
from tdx.tdesign.distributions import (
    PresentationCohort,
    TimeWindow,
    TruncatedNormal,
    UniformTime,
)

WINDOW = TimeWindow(t_s=0.0, t_e=12.0)


@pytest.fixture
def test_data_dir() -> Path:
    """Fixture providing the path to the test data directory."""
    return Path(__file__).parent / 'data'


@pytest.fixture
def golden_dir(test_data_dir: Path) -> Path:
    """Directory holding the checked-in outputs of bundled examples."""
    return test_data_dir / 'golden'


@pytest.fixture
def runner() -> CliRunner:
    """Typer CLI runner fixture."""
    return CliRunner()


@pytest.fixture
def stream() -> SeededStream:
    """Seed-0 random stream."""
    return SeededStream(0)


@pytest.fixture
def crohns_rates() -> RatePair:
    """Remission rates of the two Crohn's disease diets."""
    return RatePair.of(0.435, 0.465)


@pytest.fixture
def iid_cohort() -> PresentationCohort:
    """Four exchangeable members with uniform presentation times."""
    return PresentationCohort(
        window=WINDOW,
        members=[UniformTime(lo=0.0, hi=12.0) for _ in range(4)],
        p=0.5,
    )


@pytest.fixture
def iid_normal_cohort() -> PresentationCohort:
    """Four exchangeable members with truncated-normal times."""
    return PresentationCohort(
        window=WINDOW,
        members=[TruncatedNormal(mean=6.0, sd=3.0) for _ in range(4)],
        p=0.5,
    )


@pytest.fixture
def quartile_cohort() -> PresentationCohort:
    """Members centred at 1/8, 3/8, 5/8 and 7/8 of the window."""
    return PresentationCohort(
        window=WINDOW,
        members=[
            TruncatedNormal(mean=mean, sd=1.0)
            for mean in (1.5, 4.5, 7.5, 10.5)
        ],
        p=0.5,
    )


@pytest.fixture
def disjoint_cohort() -> PresentationCohort:
    """Member 1 always presents before member 2."""
    return PresentationCohort(
        window=WINDOW,
        members=[UniformTime(lo=0.0, hi=1.0), UniformTime(lo=2.0, hi=3.0)],
        p=0.5,
    )
