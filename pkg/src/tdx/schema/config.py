"""Pydantic models for run configuration files.

A run file is YAML with a ``schema: 1`` header::

    schema: 1
    command: bounds
    params:
      rj: 0.435
      rk: 0.465
    seed: 0
    format: json

``params`` is validated against the model registered for ``command``.
Unknown keys are rejected everywhere.
"""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

import yaml

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    ValidationError,
    model_validator,
)

from tdx.errors import ConfigError
from tdx.rdd.simulation import RddScenario
from tdx.tdesign.distributions import PresentationCohort

SCHEMA_VERSION = 1
UINT64_MAX = 2**64 - 1

Command = Literal[
    'bounds',
    'oracle',
    'transport',
    'td-sim',
    'k-sweep',
    'rdd-sim',
    'confounding',
]
OutputFormat = Literal['table', 'csv', 'json']


class Params(BaseModel):
    """Base class for command parameters."""

    model_config = ConfigDict(extra='forbid')


class BoundsParams(Params):
    """Parameters of ``bounds``."""

    rj: float = Field(ge=0.0, le=1.0)
    rk: float = Field(ge=0.0, le=1.0)
    alpha: float | None = Field(default=None, ge=0.0, le=1.0)
    excluded: float = Field(default=0.0, ge=0.0, le=1.0)
    withdrawn: float = Field(default=0.0, ge=0.0, le=1.0)
    alpha_grid: int | None = Field(default=None, ge=2)


class OracleParams(Params):
    """Parameters of ``oracle``."""

    n: int = Field(ge=1)
    rj: float = Field(ge=0.0, le=1.0)
    rk: float = Field(ge=0.0, le=1.0)
    alpha: float | None = Field(default=None, ge=0.0, le=1.0)
    cap: int = Field(default=10_000, ge=1)


class TransportParams(Params):
    """Parameters of ``transport``.

    ``n_star`` defaults to the smallest dominating opposites design.
    """

    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    qs: list[float] = Field(
        default_factory=lambda: [i / 10 for i in range(11)], min_length=1
    )
    n_star: int | None = Field(default=None, ge=1)

    @model_validator(mode='after')
    def _qs_in_range(self) -> TransportParams:
        for i, q in enumerate(self.qs):
            if not 0 <= q <= 1:
                raise ValueError(f'qs[{i}]={q} is outside [0, 1]')
        return self


class TdSimParams(Params):
    """Parameters of ``td-sim``."""

    cohort: PresentationCohort
    draws: int = Field(default=100_000, ge=1)
    cap: int = Field(default=10_000, ge=1)


class KSweepParams(Params):
    """Parameters of ``k-sweep``."""

    cohort: PresentationCohort
    sigmas: list[PositiveFloat] = Field(min_length=1)
    draws: int = Field(default=100_000, ge=1)
    cap: int = Field(default=10_000, ge=1)


class AdversarialParams(Params):
    """Inputs of the calibrated adversarial scenario."""

    cutoff: float
    latent_window: tuple[float, float]
    noise_scale: float
    noise_family: Literal['gaussian', 'uniform'] = 'gaussian'
    magnitude: float = Field(default=0.1, gt=0.0, le=0.5)
    baseline: float = Field(default=0.5, ge=0.0, le=1.0)
    delta: PositiveFloat | None = None
    grid_points: int = Field(default=2001, ge=3)


class RddSimParams(Params):
    """Parameters of ``rdd-sim``: a full scenario or an adversarial one."""

    scenario: RddScenario | None = None
    adversarial: AdversarialParams | None = None
    n_pop: int = Field(default=1_000_000, ge=1)
    density_z: float | None = None

    @model_validator(mode='after')
    def _one_scenario(self) -> RddSimParams:
        if (self.scenario is None) == (self.adversarial is None):
            raise ValueError(
                'exactly one of scenario and adversarial is required'
            )
        return self


class ConfoundingParams(Params):
    """Parameters of ``confounding``.

    ``outcomes`` maps integer arm labels to potential-outcome vectors,
    with ``null`` for unspecified entries.
    """

    outcomes: dict[int, list[Literal[0, 1] | None]] = Field(min_length=1)
    assigned: list[int] | None = None
    arms: list[int] | None = None
    tolerance: float = Field(default=1e-9, ge=0.0)


PARAMS: dict[str, type[Params]] = {
    'bounds': BoundsParams,
    'oracle': OracleParams,
    'transport': TransportParams,
    'td-sim': TdSimParams,
    'k-sweep': KSweepParams,
    'rdd-sim': RddSimParams,
    'confounding': ConfoundingParams,
}


class RunConfig(BaseModel):
    """A validated run file."""

    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    schema_version: Literal[1] = Field(alias='schema')
    command: Command
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)
    output_path: str | None = None
    format: OutputFormat = 'table'

    def command_params(self) -> Params:
        """Validate ``params`` against the model of ``command``.

        Raises
        ------
        ConfigError
            Naming the offending ``params.<key>``.
        """
        model = PARAMS[self.command]
        try:
            return model.model_validate(self.params)
        except ValidationError as exc:
            raise config_error(exc, prefix='params') from exc


def _location(loc: tuple[int | str, ...], prefix: str | None) -> str:
    parts = [str(part) for part in loc]
    if prefix:
        parts.insert(0, prefix)
    return '.'.join(parts) or '<root>'


def config_error(
    exc: ValidationError, prefix: str | None = None
) -> ConfigError:
    """Convert a pydantic error into a :class:`ConfigError`.

    The error field is the first offending key path. With several
    problems the message lists each as ``<key.path>: <reason>``.
    """
    problems = [
        (_location(err['loc'], prefix), err['msg']) for err in exc.errors()
    ]
    if len(problems) == 1:
        return ConfigError(*problems[0])
    message = '; '.join(f'{where}: {msg}' for where, msg in problems)
    return ConfigError(problems[0][0] if problems else '<root>', message)


def parse_run_config(data: Any) -> RunConfig:
    """Validate an already loaded mapping as a :class:`RunConfig`."""
    if not isinstance(data, Mapping):
        raise ConfigError('<root>', 'a run file must be a mapping')
    if 'schema' not in data:
        raise ConfigError(
            'schema', f'missing; expected schema: {SCHEMA_VERSION}'
        )
    try:
        return RunConfig.model_validate(dict(data))
    except ValidationError as exc:
        raise config_error(exc) from exc


def load_run_config(path: Path) -> RunConfig:
    """Read and validate a YAML run file."""
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError('config', f'cannot read {path}: {exc}') from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(
            'config', f'{path} is not valid YAML: {exc}'
        ) from exc
    return parse_run_config(data)
