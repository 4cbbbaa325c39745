"""Exact Gaussian-rational scalars.

All coefficients in the engine live in Q(i), realized by sympy's ``QQ_I``
domain. This module adds the pieces sympy does not provide: the bit-exact
SCALAR string grammar used by every file format, and error wrapping so that
division by zero surfaces as an engine error.

Grammar::

    RATIONAL := ["-"] digits ["/" digits]
    SCALAR   := RATIONAL | RATIONAL "*i" | RATIONAL ("+"|"-") RATIONAL "*i" | "i" | "-i"
"""

import re
from fractions import Fraction
from typing import Union

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational

from src.errors import ArithmeticFault, SchemaError

ZERO = QQ_I.zero
ONE = QQ_I.one
IMAG = QQ_I(0, 1)

ScalarLike = Union[GaussianRational, int, Fraction]

_RATIONAL = r"\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"^(?:(?P<re>-?{_RATIONAL})(?:(?P<sign>[+-])(?P<im>{_RATIONAL})\*i)?"
    rf"|(?P<pure>-?{_RATIONAL})\*i|(?P<unit>-?)i)$"
)


def rational(value: Union[int, Fraction, str]):
    """Convert an int, Fraction or "p/q" string to an element of QQ."""
    frac = Fraction(value)
    return QQ(frac.numerator, frac.denominator)


def gauss(re_part: Union[int, Fraction, str] = 0, im_part: Union[int, Fraction, str] = 0):
    """Build a Gaussian rational from real and imaginary parts."""
    return QQ_I(rational(re_part), rational(im_part))


def to_scalar(value: ScalarLike) -> GaussianRational:
    """Coerce ints, Fractions and Gaussian rationals to a QQ_I element."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return gauss(value)
    raise TypeError(f"Cannot use {value!r} as an exact scalar")


def conjugate(a: GaussianRational) -> GaussianRational:
    return QQ_I(a.x, -a.y)


def divide(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    """Exact quotient, raising ArithmeticFault on a zero divisor."""
    if not b:
        raise ArithmeticFault(f"Division by zero: {format_scalar(a)} / 0")
    return a / b


def gauss_arith(a: GaussianRational, b: GaussianRational, op: str) -> GaussianRational:
    """Field arithmetic on Gaussian rationals.

    Args:
        a: Left operand
        b: Right operand (ignored for ``conj``)
        op: One of 'add', 'mul', 'div', 'conj'

    Returns:
        The exact result
    """
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return divide(a, b)
    if op == "conj":
        return conjugate(a)
    raise ValueError(f"Unknown scalar operation: {op}")


def format_rational(q) -> str:
    """Render a QQ element as "p" or "p/q" in lowest terms."""
    num, den = int(q.numerator), int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


def format_scalar(a: GaussianRational) -> str:
    """Render a Gaussian rational in the canonical SCALAR grammar."""
    re_str = format_rational(a.x)
    if not a.y:
        return re_str
    im = a.y
    if not a.x:
        if im == QQ(1):
            return "i"
        if im == QQ(-1):
            return "-i"
        return f"{format_rational(im)}*i"
    sign = "+" if im > 0 else "-"
    return f"{re_str}{sign}{format_rational(abs(im))}*i"


def parse_scalar(text: str) -> GaussianRational:
    """Parse a SCALAR string.

    Raises:
        SchemaError: If the text does not match the grammar or has a zero denominator
    """
    if not isinstance(text, str):
        raise SchemaError(f"Coefficient must be a SCALAR string, got {text!r}")
    match = _SCALAR_RE.match(text.strip())
    if match is None:
        raise SchemaError(f"Malformed coefficient: {text!r}")
    try:
        if match.group("unit") is not None:
            return QQ_I(0, -1) if match.group("unit") == "-" else IMAG
        if match.group("pure") is not None:
            return gauss(0, match.group("pure"))
        re_part = match.group("re")
        im_part = match.group("im") or "0"
        if match.group("sign") == "-":
            im_part = f"-{im_part}"
        return gauss(re_part, im_part)
    except ZeroDivisionError as exc:
        raise SchemaError(f"Zero denominator in coefficient {text!r}") from exc
