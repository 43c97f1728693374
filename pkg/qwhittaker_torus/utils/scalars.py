"""
Scalar helpers shared by the Gibbs weight, the rates and the CLI.

A scalar is either an exact ``Fraction`` (ints are promoted) or a ``float``.
Which one is used is decided by the syntax of the input: ``"1/2"`` and ``"3"``
are exact, ``"0.5"`` and ``"1e-3"`` are floats. Nothing in this module
converts between the two silently.
"""

import math
import re
from fractions import Fraction
from typing import Iterable, List, Union

from ..errors import ParameterError

Scalar = Union[Fraction, float]

_EXACT_PATTERN = re.compile(r'^\s*[+-]?\d+\s*(/\s*\d+\s*)?$')


def parse_scalar(text: str) -> Scalar:
    """
    Parses a numeric string into an exact or float scalar.

    Args:
        text: ``"p/r"`` or an integer for an exact value, any other float
              literal for a float.

    Returns:
        ``Fraction`` for exact syntax, ``float`` otherwise.

    Raises:
        ParameterError: if the string is not a number or has a zero denominator.
    """
    if isinstance(text, (Fraction, float, int)):
        return Fraction(text) if isinstance(text, int) else text
    raw = str(text).strip()
    if _EXACT_PATTERN.match(raw):
        try:
            return Fraction(raw.replace(' ', ''))
        except ZeroDivisionError:
            raise ParameterError(f"Zero denominator in '{text}'.")
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(f"'{text}' is neither a fraction 'p/r' nor a decimal number.")
    if not math.isfinite(value):
        raise ParameterError(f"'{text}' is not a finite number.")
    return value


def parse_scalar_list(text: str) -> List[Scalar]:
    """Parses a comma separated list such as ``"1,2,1/2"``."""
    items = [item for item in str(text).split(',') if item.strip()]
    if not items:
        raise ParameterError("Expected a comma separated list of numbers.")
    return [parse_scalar(item) for item in items]


def is_exact(value) -> bool:
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def q_power(q: Scalar, exponent: int) -> Scalar:
    """``q**exponent`` with ``q**0 == 1`` for every q, including q = 0."""
    if exponent == 0:
        return Fraction(1) if is_exact(q) else 1.0
    return q ** exponent


def one_minus_q_power(q: Scalar, exponent: int) -> Scalar:
    """``1 - q**exponent``; vanishes exactly when ``exponent == 0``."""
    return 1 - q_power(q, exponent)


def format_scalar(value: Scalar):
    """JSON-friendly rendering: exact values become strings, floats stay floats."""
    if is_exact(value):
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return float(value)
