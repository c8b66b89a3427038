import pickle
from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from epochsim.exceptions import ContractException, ErrorKind, NullValueError
from epochsim.values import NULL, ZERO, ConsumptionSample, QualifiedSample, Sample, div, encode, fmt, mean, num, opt_num, q


def test_null_is_a_singleton_that_survives_pickling():
    assert type(NULL)() is NULL
    assert pickle.loads(pickle.dumps(NULL)) is NULL
    assert NULL == NULL
    assert NULL != ZERO


@pytest.mark.parametrize("op", [
    lambda: NULL + 1, lambda: 1 + NULL, lambda: NULL - ZERO, lambda: ZERO * NULL,
    lambda: NULL / 2, lambda: -NULL, lambda: abs(NULL), lambda: NULL < 1,
    lambda: NULL >= ZERO, lambda: bool(NULL), lambda: ZERO > NULL,
])
def test_null_arithmetic_and_ordering_fault(op):
    with pytest.raises(NullValueError) as info:
        op()
    assert info.value.kind is ErrorKind.NULL_VALUE
    assert isinstance(info.value, ContractException)


def test_num_quantizes_half_even():
    assert num("1.0005") == Decimal("1.000")
    assert num("1.0015") == Decimal("1.002")
    assert num(0.1) == Decimal("0.100")
    assert num(7) == Decimal("7.000")
    assert str(num("-0.0001")) == "0.000"


@pytest.mark.parametrize("bad", [True, None, [1]])
def test_num_rejects_non_numbers(bad):
    with pytest.raises(TypeError):
        num(bad)


def test_num_rejects_non_finite():
    with pytest.raises(ValueError):
        num("inf")


def test_opt_num_maps_blank_to_null():
    assert opt_num("") is NULL
    assert opt_num("  ") is NULL
    assert opt_num(None) is NULL
    assert opt_num("2.5") == Decimal("2.500")


def test_helpers():
    assert mean([num(1), num(2)]) == Decimal("1.500")
    assert div(num(1), 3) == Decimal("0.333")
    assert fmt(num(3)) == "3.000"
    with pytest.raises(NullValueError):
        q(NULL)
    with pytest.raises(ValueError):
        mean([])


@given(st.decimals(min_value=-10**6, max_value=10**6, allow_nan=False, allow_infinity=False, places=6))
def test_num_is_idempotent_and_three_places(d):
    x = num(d)
    assert num(x) == x
    assert x.as_tuple().exponent == -3
    assert abs(x - d) <= Decimal("0.0005")


def test_sample_helpers():
    s = Sample(num(1), NULL, num(3), 4, 2, "u0")
    assert s.has_null()
    assert s.channels() == (num(1), NULL, num(3))
    t = s.with_channels(num(5), num(6), num(7))
    assert (t.hour, t.day, t.source) == (4, 2, "u0") and not t.has_null()


def test_encode_forms():
    s = Sample(num(1), NULL, num(3), 4, 2, "u0")
    assert encode(s) == {"type": "sample", "tau": "1.000", "psi": None, "rho": "3.000",
                         "hour": 4, "day": 2, "source": "u0"}
    assert encode(ConsumptionSample(num(2), 3, "u3"))["kwh"] == "2.000"
    assert encode(QualifiedSample(NULL, NULL, NULL, ZERO))["reliability"] == "0.000"
    assert encode((num(1), True, "x", 4)) == ["1.000", True, "x", 4]
    with pytest.raises(TypeError):
        encode(object())
