"""Tests for run-file parsing and validation."""

from pathlib import Path

import pytest

import tdx

from tdx.errors import ConfigError
from tdx.schema.config import (
    PARAMS,
    BoundsParams,
    RddSimParams,
    load_run_config,
    parse_run_config,
)

EXAMPLES_DIR = Path(tdx.__file__).parent / 'examples'
EXAMPLES = sorted(p.stem for p in EXAMPLES_DIR.glob('*.yaml'))

BAD_CONFIG_TEST_CASES = [
    # run file, offending field
    ({'command': 'bounds', 'params': {}}, 'schema'),
    ({'schema': 2, 'command': 'bounds'}, 'schema'),
    ({'schema': 1, 'command': 'plot'}, 'command'),
    ({'schema': 1, 'command': 'bounds', 'seeds': 1}, 'seeds'),
    ({'schema': 1, 'command': 'bounds', 'seed': -1}, 'seed'),
    ({'schema': 1, 'command': 'bounds', 'format': 'xml'}, 'format'),
]

BAD_PARAMS_TEST_CASES = [
    # command, params, offending field
    ('bounds', {'rjj': 0.4, 'rj': 0.4, 'rk': 0.5}, 'params.rjj'),
    ('bounds', {'rj': 1.4, 'rk': 0.5}, 'params.rj'),
    ('oracle', {'n': 0, 'rj': 0.5, 'rk': 0.5}, 'params.n'),
    ('transport', {'n': 10, 'p': 0.5, 'qs': [0.2, 1.5]}, 'params'),
    ('k-sweep', {'sigmas': []}, 'params.cohort'),
    (
        'td-sim',
        {
            'cohort': {
                'window': {'t_s': 0, 't_e': 1},
                'p': 0.5,
                'members': [
                    {'family': 'gamma', 'shape': 2},
                    {'family': 'uniform', 'lo': 0, 'hi': 1},
                ],
            }
        },
        'params.cohort.members.0',
    ),
    ('confounding', {'outcomes': {0: [0, 2]}}, 'params.outcomes'),
]


def test_parse_minimal():
    """Test defaults of a minimal run file."""
    run = parse_run_config({'schema': 1, 'command': 'bounds'})
    assert run.seed == 0
    assert run.format == 'table'
    assert run.output_path is None
    assert run.params == {}


@pytest.mark.parametrize('data,field', BAD_CONFIG_TEST_CASES)
def test_bad_run_files(data, field):
    """Test that invalid run files name the offending key."""
    with pytest.raises(ConfigError) as exc:
        parse_run_config(data)
    assert exc.value.field.startswith(field)
    assert exc.value.exit_code == 2


def test_run_file_must_be_mapping():
    """Test that a YAML list is not a run file."""
    with pytest.raises(ConfigError):
        parse_run_config(['schema', 1])


@pytest.mark.parametrize('command,params,field', BAD_PARAMS_TEST_CASES)
def test_bad_params(command, params, field):
    """Test that parameter errors are reported under params."""
    run = parse_run_config(
        {'schema': 1, 'command': command, 'params': params}
    )
    with pytest.raises(ConfigError) as exc:
        run.command_params()
    assert exc.value.field.startswith(field)


def test_misspelled_key_message():
    """Test that the message names the misspelled key."""
    run = parse_run_config(
        {'schema': 1, 'command': 'bounds', 'params': {'rjj': 0.4}}
    )
    with pytest.raises(ConfigError) as exc:
        run.command_params()
    assert 'params.rjj' in str(exc.value)


def test_bounds_params_defaults():
    """Test the default attrition and alpha settings."""
    params = parse_run_config(
        {'schema': 1, 'command': 'bounds', 'params': {'rj': 0.4, 'rk': 0.5}}
    ).command_params()
    assert isinstance(params, BoundsParams)
    assert params.alpha is None
    assert (params.excluded, params.withdrawn) == (0.0, 0.0)


def test_rdd_needs_exactly_one_scenario():
    """Test that rdd-sim takes a scenario or an adversarial setup."""
    run = parse_run_config({'schema': 1, 'command': 'rdd-sim', 'params': {}})
    with pytest.raises(ConfigError):
        run.command_params()


@pytest.mark.parametrize('name', EXAMPLES)
def test_bundled_examples_validate(name):
    """Test that every bundled example parses and validates."""
    run = load_run_config(EXAMPLES_DIR / f'{name}.yaml')
    params = run.command_params()
    assert isinstance(params, PARAMS[run.command])
    assert run.schema_version == 1


def test_bundled_example_count():
    """Test that all seven examples are bundled."""
    assert EXAMPLES == [
        'adversarial-cutoff',
        'birthweight-rdd',
        'crohns-bounds',
        'halving-recruitment',
        'iid-td',
        'quartile-means-td',
        'three-arm-confounding',
    ]


def test_adversarial_example_params():
    """Test the adversarial example settings."""
    run = load_run_config(EXAMPLES_DIR / 'adversarial-cutoff.yaml')
    params = run.command_params()
    assert isinstance(params, RddSimParams)
    assert params.scenario is None
    assert params.adversarial is not None
    assert params.adversarial.latent_window == (1499.0, 1501.0)


def test_load_invalid_yaml(tmp_path):
    """Test that unparsable YAML raises ConfigError."""
    path = tmp_path / 'broken.yaml'
    path.write_text('schema: [1\n', encoding='utf-8')
    with pytest.raises(ConfigError) as exc:
        load_run_config(path)
    assert exc.value.field == 'config'


def test_load_missing_file(tmp_path):
    """Test that a missing run file raises ConfigError."""
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / 'missing.yaml')
