from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toricbt.errors import DivisionByZero, NegativeValuation, ParseError, UnsupportedEnumeration
from toricbt.valfield import INF, LaurentField, PAdicField, field_from_json

Q2 = PAdicField(2)
Q3 = PAdicField(3)
LT = LaurentField()


def test_padic_val_examples():
    assert Q2.val(Fraction(12)) == 2
    assert Q2.val(Fraction(3, 8)) == -3
    assert Q2.val(Fraction(0)) is INF
    assert LT.val(LT.zero) is INF


def test_field_ops_examples():
    s = Q2.add(Fraction(1, 2), Fraction(1, 2))
    assert s == 1 and Q2.val(s) == 0
    t = LT.uniformizer_pow(1)
    assert LT.mul(t, LT.div(LT.one, t)) == LT.one
    assert Q3.val(Q3.add(Fraction(1, 3), Fraction(2, 3))) == 0
    with pytest.raises(DivisionByZero):
        Q2.div(Fraction(1), Fraction(0))
    with pytest.raises(DivisionByZero):
        LT.div(LT.one, LT.zero)


def test_uniformizer_pow():
    assert Q2.uniformizer_pow(3) == 8
    assert Q2.uniformizer_pow(-1) == Fraction(1, 2)
    t2 = LT.uniformizer_pow(2)
    assert LT.val(t2) == 2 and t2 == LT.parse("t^2")


def test_residue_examples():
    assert Q2.residue(Fraction(5)) == 1
    with pytest.raises(NegativeValuation):
        Q2.residue(Fraction(1, 2))
    assert LT.residue(LT.parse("(3+t)/(1-t)")) == 3
    with pytest.raises(NegativeValuation):
        LT.residue(LT.parse("1/t"))


def test_padic_prime_check():
    with pytest.raises(ValueError):
        PAdicField(4)
    with pytest.raises(ValueError):
        PAdicField(1)


def test_laurent_parse_and_format_roundtrip():
    for text in ["t", "-t^-2 + 3", "(3+t)/(1-t)", "1/2", "t**3/(2*t-1)", "(t+1)(t-1)", "-(t^2)"]:
        x = LT.parse(text)
        assert LT.parse(LT.format(x)) == x
    assert LT.val(LT.parse("t^-2 + t")) == -2
    with pytest.raises(ParseError):
        LT.parse("t +")
    with pytest.raises(ParseError):
        LT.parse("s")


def test_padic_parse_and_format():
    assert Q2.parse("-3/8") == Fraction(-3, 8)
    assert Q2.format(Fraction(6, 4)) == "3/2"
    with pytest.raises(ParseError):
        Q2.parse("1/0")
    with pytest.raises(ParseError):
        Q2.parse("x")


def test_residue_enumeration():
    assert Q3.residue_lifts() == [0, 1, 2]
    with pytest.raises(UnsupportedEnumeration):
        LT.residue_lifts()


def test_field_json():
    assert field_from_json({"backend": "padic", "p": 2}) == Q2
    assert field_from_json({"backend": "laurent"}) == LT
    assert Q2.to_json() == {"backend": "padic", "p": 2}
    assert LT.to_json() == {"backend": "laurent"}
    with pytest.raises(ParseError):
        field_from_json({"backend": "adelic"})


def test_truncate_is_canonical_representative():
    # truncate(a, k) picks the representative of a + pi^k O with only terms below k
    assert Q2.truncate(Fraction(7), 2) == 3
    assert Q2.truncate(Fraction(5, 4), 1) == Fraction(5, 4)
    assert Q2.truncate(Fraction(8), 3) == 0
    x = LT.parse("t^-2 + 3 + t")
    assert LT.truncate(x, 1) == LT.parse("t^-2 + 3")
    assert LT.truncate(x, -1) == LT.parse("t^-2")


def test_canonical_form_makes_equality_structural():
    x = LT.parse("(t^2 - 1)/(t - 1)")
    y = LT.parse("t + 1")
    assert x == y and hash(x) == hash(y)
    assert LT.parse("(2t)/(4)") == LT.parse("t/2")


# --- properties -------------------------------------------------------------

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)


def laurent_elements():
    coeffs = st.lists(st.integers(-5, 5), min_size=1, max_size=4)

    def build(num, den, shift):
        t = LT.uniformizer_pow(1)
        n = sum((LT.coerce(c) * t ** i for i, c in enumerate(num)), LT.zero)
        d = sum((LT.coerce(c) * t ** i for i, c in enumerate(den)), LT.zero)
        if d == 0:
            d = LT.one
        return n / d * LT.uniformizer_pow(shift)

    return st.builds(build, coeffs, coeffs, st.integers(-3, 3))


def _check_valuation_axioms(field, a, b):
    va, vb = field.val(a), field.val(b)
    assert field.val(a * b) == va + vb
    s = field.val(a + b)
    assert s >= min(va, vb)
    if va != vb:
        assert s == min(va, vb)


@given(fractions, fractions, st.sampled_from([2, 3, 5, 7]))
def test_padic_valuation_axioms(a, b, p):
    _check_valuation_axioms(PAdicField(p), a, b)


@given(laurent_elements(), laurent_elements())
def test_laurent_valuation_axioms(a, b):
    _check_valuation_axioms(LT, a, b)


@given(fractions, fractions, st.sampled_from([2, 3, 5]))
def test_padic_residue_is_ring_homomorphism(a, b, p):
    f = PAdicField(p)
    if f.val(a) < 0 or f.val(b) < 0:
        return
    assert f.residue(a + b) == (f.residue(a) + f.residue(b)) % p
    assert f.residue(a * b) == (f.residue(a) * f.residue(b)) % p


@given(laurent_elements(), laurent_elements())
def test_laurent_residue_is_ring_homomorphism(a, b):
    if LT.val(a) < 0 or LT.val(b) < 0:
        return
    assert LT.residue(a + b) == LT.residue(a) + LT.residue(b)
    assert LT.residue(a * b) == LT.residue(a) * LT.residue(b)


@given(fractions, st.integers(-4, 6), st.sampled_from([2, 3]))
def test_padic_truncate_properties(a, k, p):
    f = PAdicField(p)
    rep = f.truncate(a, k)
    assert f.val(a - rep) >= k
    assert rep == 0 or f.val(rep) < k
    assert f.truncate(rep, k) == rep


@given(laurent_elements(), st.integers(-4, 4))
def test_laurent_truncate_properties(a, k):
    rep = LT.truncate(a, k)
    assert LT.val(a - rep) >= k
    assert rep == 0 or LT.val(rep) < k


@given(laurent_elements())
def test_laurent_format_roundtrip(a):
    assert LT.parse(LT.format(a)) == a
