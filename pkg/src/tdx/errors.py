"""Exception hierarchy shared by every tdx module.

Each error names the offending input ``field`` and carries the CLI
``exit_code`` it maps to.
"""

from __future__ import annotations

from typing import ClassVar

from public import public


@public
class TdxError(Exception):
    """Base class for tdx errors."""

    exit_code: ClassVar[int] = 2

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        self.message = message
        super().__init__(f'{field}: {message}')


@public
class InputValidationError(TdxError):
    """Malformed input data (exit status 2)."""

    ...


@public
class InfeasibilityError(TdxError):
    """Constraints that no configuration can satisfy (exit status 3)."""

    exit_code: ClassVar[int] = 3


@public
class ScaleError(TdxError):
    """Simulation or enumeration scale problems (exit status 4)."""

    exit_code: ClassVar[int] = 4


# core
@public
class OutOfRange(InputValidationError):
    """A proportion outside [0, 1]."""

    ...


@public
class EmptyTable(InputValidationError):
    """A response table built from zero counts."""

    ...


# sensitivity
@public
class NonIntegralRates(InputValidationError):
    """Rates that are not multiples of 1/n."""

    ...


@public
class BadAttrition(InputValidationError):
    """Exclusion plus withdrawal exceeding the whole sample."""

    ...


@public
class MissingAssignment(InputValidationError):
    """A confounding check on a cohort without assigned arms."""

    ...


@public
class MissingPotentialOutcome(InputValidationError):
    """A potential outcome needed by the confounding check is absent."""

    ...


@public
class AlphaInfeasible(InfeasibilityError):
    """An affected proportion that no response table can realise."""

    ...


@public
class InfeasibleConstraints(InfeasibilityError):
    """An empty feasible set in the enumeration oracle."""

    ...


# transport
@public
class MissingNStar(InputValidationError):
    """Opposites-design cells requested without a sample size."""

    ...


@public
class MismatchedQ(InputValidationError):
    """Cell tables computed with different preference fractions."""

    ...


# tdesign
@public
class CohortError(InputValidationError):
    """An invalid presentation cohort."""

    ...


@public
class VarianceUnavailable(InputValidationError):
    """A member distribution whose variance cannot be computed."""

    ...


@public
class ShapeMismatch(InputValidationError):
    """Subsample distributions over different (n, m) spaces."""

    ...


@public
class SpaceTooLarge(ScaleError):
    """A subset space beyond the enumeration cap."""

    ...


# rdd
@public
class ScenarioError(InputValidationError):
    """An invalid discontinuity scenario."""

    ...


@public
class ZeroMass(InputValidationError):
    """A conditional density that vanishes on the whole grid."""

    ...


@public
class DegenerateWindow(ScaleError):
    """A window with nobody (or one empty side) in it."""

    ...


@public
class CalibrationFailed(InfeasibilityError):
    """The adversarial scenario could not be calibrated."""

    ...


# cli
@public
class ConfigError(InputValidationError):
    """A run configuration that does not parse or validate."""

    ...
