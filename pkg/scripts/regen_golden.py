"""
Regenerate the golden JSON reports used by the CLI tests.

Usage:
    python scripts/regen_golden.py

Only the deterministic examples have golden files. Review the diff
before committing: a changed golden file is a changed output contract.
"""

from __future__ import annotations

from pathlib import Path

from tdx.cli import example_path, resolve_config
from tdx.commands import build_report
from tdx.reports import write_report
from tdx.schema.config import load_run_config

GOLDEN_DIR = (
    Path(__file__).resolve().parent.parent / 'tests' / 'data' / 'golden'
)

GOLDEN_EXAMPLES = (
    'crohns-bounds',
    'halving-recruitment',
    'three-arm-confounding',
)


def main() -> None:
    """Write one ``<example>.json`` per deterministic example."""
    for name in GOLDEN_EXAMPLES:
        path = example_path(name)
        command = load_run_config(path).command
        run = resolve_config(command, path, {}, fmt='json')
        out = write_report(
            build_report(run), 'json', GOLDEN_DIR / f'{name}.json'
        )
        print(f'wrote {out}')


if __name__ == '__main__':
    main()
