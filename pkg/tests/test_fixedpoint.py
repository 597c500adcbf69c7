"""Scalar fixed-point semantics, checked against exact rational arithmetic.

The frozen constants below were computed by hand with integer arithmetic
(floor(x * 2^f) etc.) before the implementation existed.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qppr import (
    FormatMismatchError,
    FxFormat,
    FxValue,
    NegativeInputError,
    RangeOverflowError,
    SaturationTally,
    fx_add,
    fx_mul,
    quantize,
    to_fraction,
    to_real,
)

F19 = FxFormat(19)


class TestFrozenValues:
    # floor((1/3) * 2^19) = 524288 // 3
    def test_quantize_one_third(self):
        assert quantize(Fraction(1, 3), F19).raw == 174762

    def test_add(self):
        a = FxValue(52428, F19)
        b = FxValue(104857, F19)
        assert fx_add(a, b).raw == 157285

    # (174762 * 174762) >> 19 = 58253
    def test_mul(self):
        third = FxValue(174762, F19)
        assert fx_mul(third, third).raw == 58253

    def test_mul_matches_rational_ninth(self):
        third = FxValue(174762, F19)
        ninth = to_fraction(fx_mul(third, third))
        assert 0 <= Fraction(1, 9) - ninth < Fraction(2, 2**19)


class TestQuantize:
    def test_exact_one(self):
        assert quantize(1.0, F19).raw == F19.scale

    def test_zero(self):
        assert quantize(0, F19).raw == 0

    def test_max_representable(self):
        v = quantize(2 - 2.0**-19, F19)
        assert v.raw == F19.max_raw

    def test_negative_rejected(self):
        with pytest.raises(NegativeInputError):
            quantize(-1e-9, F19)

    def test_two_overflows(self):
        with pytest.raises(RangeOverflowError):
            quantize(2.0, F19)

    @given(st.fractions(min_value=0, max_value=Fraction(2**20 - 1, 2**19)))
    def test_matches_floor_oracle(self, x):
        f = 19
        assert quantize(x, F19).raw == math.floor(x * 2**f)

    @given(st.floats(min_value=0.0, max_value=1.999, allow_nan=False))
    def test_truncation_error_below_resolution(self, x):
        v = quantize(x, F19)
        err = Fraction(x) - to_fraction(v)
        assert 0 <= err < Fraction(1, 2**19)


class TestFormat:
    def test_str(self):
        assert str(F19) == "Q1.19"

    def test_total_bits(self):
        assert F19.total_bits == 20

    def test_scale_and_max(self):
        assert F19.scale == 2**19
        assert F19.max_raw == 2**20 - 1

    @pytest.mark.parametrize("bad", [0, -3, 63])
    def test_width_domain(self, bad):
        with pytest.raises(ValueError):
            FxFormat(bad)

    def test_value_bounds_checked(self):
        with pytest.raises(RangeOverflowError):
            FxValue(F19.max_raw + 1, F19)
        with pytest.raises(NegativeInputError):
            FxValue(-1, F19)


raws = st.integers(min_value=0, max_value=F19.max_raw)


class TestSaturatingOps:
    @given(raws, raws)
    def test_add_is_clamped_integer_add(self, a, b):
        tally = SaturationTally()
        out = fx_add(FxValue(a, F19), FxValue(b, F19), tally)
        assert out.raw == min(a + b, F19.max_raw)
        assert bool(tally) == (a + b > F19.max_raw)

    @given(raws, raws)
    def test_mul_is_clamped_truncating_mul(self, a, b):
        tally = SaturationTally()
        out = fx_mul(FxValue(a, F19), FxValue(b, F19), tally)
        assert out.raw == min((a * b) >> 19, F19.max_raw)
        assert bool(tally) == ((a * b) >> 19 > F19.max_raw)

    @given(raws, raws)
    def test_mul_truncates_toward_zero(self, a, b):
        exact = to_fraction(FxValue(a, F19)) * to_fraction(FxValue(b, F19))
        got = to_fraction(fx_mul(FxValue(a, F19), FxValue(b, F19)))
        if exact <= to_fraction(FxValue(F19.max_raw, F19)):
            assert 0 <= exact - got < Fraction(1, 2**19)

    def test_tally_accumulates(self):
        tally = SaturationTally()
        top = FxValue(F19.max_raw, F19)
        fx_add(top, top, tally)
        fx_add(top, top, tally)
        assert tally.count == 2

    def test_mixed_formats_rejected(self):
        with pytest.raises(FormatMismatchError):
            fx_add(FxValue(1, F19), FxValue(1, FxFormat(21)))
        with pytest.raises(FormatMismatchError):
            fx_mul(FxValue(1, F19), FxValue(1, FxFormat(21)))


class TestConversions:
    @given(raws)
    def test_to_real_matches_fraction(self, a):
        v = FxValue(a, F19)
        assert to_real(v) == float(Fraction(a, 2**19))
        assert to_fraction(v) == Fraction(a, 2**19)

    @given(st.integers(min_value=1, max_value=62))
    def test_resolution(self, f):
        fmt = FxFormat(f)
        assert fmt.resolution == 2.0**-f

    def test_float_sugar(self):
        assert float(FxValue(F19.scale, F19)) == 1.0

    @given(raws, raws)
    def test_operator_sugar_matches_ops(self, a, b):
        va, vb = FxValue(a, F19), FxValue(b, F19)
        assert (va + vb).raw == fx_add(va, vb).raw
        assert (va * vb).raw == fx_mul(va, vb).raw
