import math

import numpy as np
import pytest

from systolic.config import get_settings
from systolic.models.errors import InputError
from systolic.utils.helpers import (
    compile_field,
    exponent_label,
    format_float,
    parse_classes,
    parse_exponents,
    parse_grid,
    parse_params,
)


class TestCompileField:
    def test_vectorized(self):
        field = compile_field("a*sin(2*pi*x)*cos(2*pi*y)", ("x", "y"), {"a": 0.5})
        x = np.array([0.25, 0.5])
        np.testing.assert_allclose(field(x, np.zeros(2)), [0.5, 0.0], atol=1e-15)

    def test_constant_broadcasts(self):
        field = compile_field("2", ("u", "v"))
        assert field(np.zeros((3, 4)), np.zeros((3, 4))).shape == (3, 4)

    def test_caret_is_power(self):
        assert compile_field("u^2", ("u",))(np.array([3.0]))[0] == 9.0

    @pytest.mark.parametrize("expression", ["a*x", "sin(", "x +* 2"])
    def test_rejected(self, expression):
        with pytest.raises(InputError):
            compile_field(expression, ("x", "y"))


class TestParsers:
    def test_params(self):
        assert parse_params(["a=0.2", " b = 3"]) == {"a": 0.2, "b": 3.0}
        assert parse_params(None) == {}
        with pytest.raises(InputError):
            parse_params(["a"])
        with pytest.raises(InputError):
            parse_params(["a=x"])

    def test_classes(self):
        assert parse_classes("1,0;0,1; 2,-1") == [(1, 0), (0, 1), (2, -1)]
        with pytest.raises(InputError):
            parse_classes("1,0,2")
        with pytest.raises(InputError):
            parse_classes("1.5,0")

    def test_exponents(self):
        assert parse_exponents("inf,4,2,1") == [1.0, 2.0, 4.0, math.inf]
        with pytest.raises(InputError):
            parse_exponents("2,four")

    def test_grid(self):
        assert parse_grid("128x64") == (128, 64)
        assert parse_grid("32X32") == (32, 32)
        with pytest.raises(InputError):
            parse_grid("128")


def test_exponent_label():
    assert [exponent_label(p) for p in (2.0, 4, 2.5, math.inf)] == ["2", "4", "2.5", "inf"]


def test_format_float():
    assert format_float(1.0) == "1"
    assert format_float(1 / 3, 6) == "0.333333"
    assert format_float(math.nan) == '"nan"'
    assert format_float(-math.inf) == '"-inf"'


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SYSTOLIC_MINIMALITY_C", "50")
    get_settings.cache_clear()
    try:
        assert get_settings().MINIMALITY_C == 50.0
    finally:
        monkeypatch.delenv("SYSTOLIC_MINIMALITY_C")
        get_settings.cache_clear()
