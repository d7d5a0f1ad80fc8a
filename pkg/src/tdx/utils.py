"""TDX utility functions."""

from __future__ import annotations

import math

from fractions import Fraction

Number = float | Fraction

TOLERANCE = 1e-12


def is_float(value: str) -> bool:
    """Check if a string is a float."""
    if not value.isnumeric():
        try:
            float(value)
            return True
        except ValueError:
            return False
    return False


def parse_float_list(value: str) -> list[float]:
    """Parse a comma separated list of numbers, e.g. ``'0.01,0.05'``."""
    items = [item.strip() for item in value.split(',') if item.strip()]
    bad = [item for item in items if not (item.isnumeric() or is_float(item))]
    if bad:
        raise ValueError(f'not a number: {", ".join(bad)}')
    return [float(item) for item in items]


def nearest_integer(value: Number, tol: float = 1e-9) -> int | None:
    """Return the integer within ``tol`` of ``value``, if there is one."""
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else None
    rounded = round(value)
    if math.isclose(value, rounded, rel_tol=0.0, abs_tol=tol):
        return int(rounded)
    return None
