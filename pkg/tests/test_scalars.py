"""Tests for the scalars module."""

import pytest
import sys
from fractions import Fraction
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import ArithmeticFault, SchemaError
from src.scalars import (
    IMAG,
    conjugate,
    divide,
    format_scalar,
    gauss,
    gauss_arith,
    parse_scalar,
    to_scalar,
)


class TestArithmetic:
    """Tests for Gaussian-rational field operations."""

    def test_product_of_conjugates(self):
        """(1+i)(1-i) is 2."""
        assert gauss_arith(gauss(1, 1), gauss(1, -1), "mul") == gauss(2)

    def test_conjugation(self):
        """conj(3/2 - 2i) is 3/2 + 2i."""
        assert gauss_arith(gauss("3/2", -2), None, "conj") == gauss("3/2", 2)

    def test_rational_division(self):
        """(1/3) / (1/6) is 2."""
        assert gauss_arith(gauss("1/3"), gauss("1/6"), "div") == gauss(2)

    def test_complex_division(self):
        """Division inverts multiplication exactly."""
        a, b = gauss("2/7", 3), gauss(-1, "5/3")
        assert divide(a * b, b) == a

    def test_division_by_zero(self):
        """Zero divisor should raise ArithmeticFault."""
        with pytest.raises(ArithmeticFault):
            divide(gauss(1), gauss(0))

    def test_unknown_operation(self):
        """Unknown op names are rejected."""
        with pytest.raises(ValueError):
            gauss_arith(gauss(1), gauss(1), "pow")

    def test_conjugate_involution(self):
        """conj(conj(a)) == a."""
        a = gauss("-4/9", "11/2")
        assert conjugate(conjugate(a)) == a

    def test_to_scalar(self):
        """ints and Fractions coerce to QQ_I."""
        assert to_scalar(3) == gauss(3)
        assert to_scalar(Fraction(1, 2)) == gauss("1/2")
        with pytest.raises(TypeError):
            to_scalar(0.5)


class TestScalarGrammar:
    """Tests for the SCALAR string format."""

    @pytest.mark.parametrize(
        "text",
        ["0", "2", "-7/3", "i", "-i", "5*i", "-1/2*i", "3/2-2*i", "1/2+1/3*i"],
    )
    def test_canonical_strings_round_trip(self, text):
        """Canonical strings re-render identically."""
        assert format_scalar(parse_scalar(text)) == text

    def test_lowest_terms(self):
        """Non-reduced input renders in lowest terms."""
        assert format_scalar(parse_scalar("4/6")) == "2/3"
        assert format_scalar(parse_scalar("2/1")) == "2"

    def test_unit_imaginary(self):
        assert parse_scalar("i") == IMAG
        assert parse_scalar("1*i") == IMAG
        assert format_scalar(gauss(0, 1)) == "i"

    @pytest.mark.parametrize("text", ["", "1.5", "i*2", "1+i", "abc", "--1", "1/2/3"])
    def test_malformed(self, text):
        """Strings outside the grammar raise SchemaError."""
        with pytest.raises(SchemaError):
            parse_scalar(text)

    def test_zero_denominator(self):
        with pytest.raises(SchemaError):
            parse_scalar("1/0")

    def test_non_string(self):
        """Numbers in JSON are rejected; only strings are scalars."""
        with pytest.raises(SchemaError):
            parse_scalar(1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
