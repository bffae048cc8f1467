import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toricbt import linalg as la
from toricbt import sampling as sm
from toricbt.errors import DimensionMismatch, NonIntegralNorm, RankDeficient, Singular
from toricbt.latnorm import (
    AdaptedNorm,
    Prevaluation,
    ball,
    ceil_norm,
    common_adapted_basis,
    diagonal_lattice,
    floor_norm,
    hnf,
    invariant_factors,
    is_adapted,
    lattice_contains,
    lattice_contains_vector,
    lattice_equal,
    lattice_from_columns,
    lattice_from_norm,
    lattice_intersect,
    lattice_scale,
    lattice_sum,
    norm_equal,
    norm_eval,
    norm_from_lattice,
    norm_leq,
    pullback_check,
    pullback_leq,
    standard_lattice,
)
from toricbt.valfield import INF, LaurentField, PAdicField

Q = PAdicField(2)
LT = LaurentField()
STD = ((1, 0), (0, 1))


def member(field, gens, v):
    """Oracle: solve v = G y for a square generator matrix and ask val(y_i) >= 0."""
    g = la.coerce_matrix(field, gens)
    y = la.solve(field, g, tuple(field.coerce(x) for x in v))
    return all(field.val(c) >= 0 for c in y)


def diag_lat(*exps):
    return diagonal_lattice(Q, exps)


# --- hnf and lattice operations ---------------------------------------------

def test_hnf_examples():
    assert hnf(Q, [[1, 0, 1], [0, 1, 1]]).matrix == la.identity(Q, 2)
    lat = lattice_from_columns(Q, [(2, 0), (1, 1)])
    assert hnf(Q, lat.matrix) == lat
    a = lattice_from_columns(Q, [(4, 2), (0, 1)])
    b = hnf(Q, la.from_columns([(4, 0), (0, 1), (4, 2)]))
    assert lattice_equal(a, b)
    for col in [(4, 2), (0, 1), (-4, -2), (0, -1)]:
        assert member(Q, la.from_columns([(4, 0), (0, 1)]), col)
        assert lattice_contains_vector(a, col)


def test_hnf_rank_deficient():
    with pytest.raises(RankDeficient):
        hnf(Q, [[1, 2], [2, 4]])
    with pytest.raises(RankDeficient):
        hnf(Q, [[1], [0]])


def test_containment_examples():
    big = standard_lattice(Q, 2)
    small = diag_lat(1, 0)
    assert lattice_contains(big, small)
    assert not lattice_contains(small, big)


def test_sum_and_intersection_diagonal():
    a, b = diag_lat(1, 0), diag_lat(0, 1)
    assert lattice_equal(lattice_sum(a, b), standard_lattice(Q, 2))
    assert lattice_equal(lattice_intersect(a, b), diag_lat(1, 1))


def test_intersection_matches_sampling_oracle():
    ga = la.from_columns([(1, 0), (0, 1)])
    gb = la.from_columns([(1, 1), (0, Fraction(1, 2))])
    inter = lattice_intersect(hnf(Q, ga), hnf(Q, gb))
    rng = random.Random(11)
    for _ in range(500):
        v = tuple(sm.random_scalar(Q, rng, -2, 2) for _ in range(2))
        expected = member(Q, ga, v) and member(Q, gb, v)
        assert lattice_contains_vector(inter, v) == expected


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        lattice_contains(standard_lattice(Q, 2), standard_lattice(Q, 3))
    with pytest.raises(DimensionMismatch):
        lattice_sum(standard_lattice(Q, 2), standard_lattice(PAdicField(3), 2))


@given(st.integers(0, 10**6))
def test_canonical_form_is_a_lattice_invariant(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    gens = sm.random_invertible(field, rng, r)
    lat = hnf(field, gens)
    # change of O-basis: multiply by a random unimodular matrix (unit diagonal, integral entries)
    u = [[field.one if i == j else field.zero for j in range(r)] for i in range(r)]
    for i in range(r):
        for j in range(r):
            if i < j:
                u[i][j] = sm.random_scalar(field, rng, 0, 2)
    other = la.mat_mul(field, gens, la.freeze(u))
    assert hnf(field, other) == lat
    assert hnf(field, lat.matrix) == lat
    for col in la.columns(gens):
        assert lattice_contains_vector(lat, col)
    for col in lat.columns():
        assert member(field, gens, col)


@given(st.integers(0, 10**6))
def test_sum_intersection_against_membership(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    ga, gb = sm.random_invertible(field, rng, r), sm.random_invertible(field, rng, r)
    a, b = hnf(field, ga), hnf(field, gb)
    s, i = lattice_sum(a, b), lattice_intersect(a, b)
    assert lattice_contains(s, a) and lattice_contains(s, b)
    assert lattice_contains(a, i) and lattice_contains(b, i)
    for _ in range(20):
        v = sm.random_vector(field, rng, r)
        assert lattice_contains_vector(i, v) == (member(field, ga, v) and member(field, gb, v))


# --- norms --------------------------------------------------------------------

def test_norm_eval_examples():
    assert norm_eval(AdaptedNorm(Q, STD, (0, 0)), (1, 1)) == 0
    assert norm_eval(AdaptedNorm(Q, STD, (Fraction(1, 2), 0)), (2, 0)) == Fraction(3, 2)
    skew = la.from_columns([(1, 0), (1, 1)])
    assert norm_eval(AdaptedNorm(Q, skew, (0, 0)), (0, 1)) == 0
    assert norm_eval(AdaptedNorm(Q, STD, (0, 0)), (0, 0)) is INF


def test_ball_examples():
    half = AdaptedNorm(Q, STD, (Fraction(1, 2), 0))
    assert lattice_equal(ball(AdaptedNorm(Q, STD, (0, 0)), 0), standard_lattice(Q, 2))
    assert lattice_equal(ball(half, 0), standard_lattice(Q, 2))
    assert lattice_equal(ball(half, Fraction(3, 4)), diag_lat(1, 1))


def test_norm_lattice_examples():
    v = norm_from_lattice(standard_lattice(Q, 2))
    assert v.values == (0, 0) and v.basis == la.identity(Q, 2)
    lat = diag_lat(1, 0)
    w = norm_from_lattice(lat)

    def oracle(e):
        # max{k : pi^-k e in lat}, searched directly
        return max(k for k in range(-10, 11) if lattice_contains_vector(lat, tuple(Fraction(2) ** -k * x for x in e)))

    assert norm_eval(w, (1, 0)) == oracle((1, 0)) == -1
    assert norm_eval(w, (3, 4)) == oracle((3, 4))
    with pytest.raises(NonIntegralNorm):
        lattice_from_norm(AdaptedNorm(Q, STD, (Fraction(1, 2), 0)))


def test_floor_ceil_examples():
    v = AdaptedNorm(Q, STD, (Fraction(1, 2), 0))
    assert ceil_norm(v).values == (1, 0) and floor_norm(v).values == (0, 0)
    w = AdaptedNorm(Q, STD, (3, -2))
    assert ceil_norm(w).values == floor_norm(w).values == (3, -2)
    assert ceil_norm(AdaptedNorm(Q, STD, (Fraction(-1, 3), Fraction(5, 2)))).values == (0, 3)


def test_norm_leq_examples():
    assert norm_leq(AdaptedNorm(Q, STD, (0, 0)), AdaptedNorm(Q, STD, (1, 1)))
    v = norm_from_lattice(standard_lattice(Q, 2))
    w = norm_from_lattice(lattice_scale(standard_lattice(Q, 2), 2))
    assert not norm_leq(v, w) and norm_leq(w, v)


def test_norm_equal_examples():
    v = AdaptedNorm(Q, STD, (0, 0))
    assert norm_equal(v, AdaptedNorm(Q, STD, (0, 0)))
    assert norm_equal(v, AdaptedNorm(Q, la.from_columns([(1, 0), (2, 1)]), (0, 0)))
    assert not norm_equal(v, AdaptedNorm(Q, STD, (0, 1)))


def test_is_adapted_examples():
    std = norm_from_lattice(standard_lattice(Q, 2))
    for delta in range(4):
        assert is_adapted(std, la.from_columns([(1, 0), (2 ** delta, 1)]))
    both = la.from_columns([(1, 1), (0, 1)])
    for k in range(5):
        v = norm_from_lattice(lattice_from_columns(Q, [(1, 0), (0, Fraction(1, 2 ** k))]))
        assert is_adapted(v, both)
    assert not is_adapted(norm_from_lattice(lattice_from_columns(Q, [(1, 0), (0, 2)])), both)
    with pytest.raises(Singular):
        is_adapted(std, ((1, 2), (2, 4)))


def test_invariant_factor_examples():
    assert invariant_factors(standard_lattice(Q, 2), diag_lat(0, 3)).exponents == (3, 0)
    b = lattice_from_columns(Q, [(1, Fraction(1, 4)), (0, 1)])
    inv = invariant_factors(standard_lattice(Q, 2), b)
    assert inv.exponents == (2, -2)
    g = inv.basis
    scaled = la.scale_columns(Q, g, [Fraction(2) ** e for e in inv.exponents])
    assert lattice_equal(hnf(Q, scaled), b)
    assert lattice_equal(hnf(Q, g), standard_lattice(Q, 2))


def test_pullback_examples():
    std = AdaptedNorm(Q, STD, (0, 0))
    assert pullback_check(STD, std, std)
    assert not pullback_check(((Fraction(1, 2), 0), (0, 1)), std, std)
    with pytest.raises(DimensionMismatch):
        pullback_check(((1, 0, 0),), std, std)
    with pytest.raises(NonIntegralNorm):
        pullback_check(STD, AdaptedNorm(Q, STD, (Fraction(1, 2), 0)), std)


def test_prevaluation_flag():
    pv = Prevaluation(Q, STD, (1, 0))
    assert pv((3, 0)) == 1 and pv((3, 5)) == 0 and pv((0, 0)) is INF
    assert pv((Fraction(1, 8), 0)) == 1
    assert pv.flag() == [(1, ((1, 0),)), (0, la.identity(Q, 2))]


# --- properties -------------------------------------------------------------

seeds = st.integers(0, 10**6)


@given(seeds)
def test_norm_axioms(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    v = sm.random_norm(field, rng, r)
    e, f = sm.random_vector(field, rng, r), sm.random_vector(field, rng, r)
    lam = sm.random_unit(field, rng) * field.uniformizer_pow(rng.randint(-2, 2))
    assert norm_eval(v, tuple(lam * x for x in e)) == field.val(lam) + norm_eval(v, e)
    assert norm_eval(v, tuple(a + b for a, b in zip(e, f))) >= min(norm_eval(v, e), norm_eval(v, f))
    assert norm_eval(v, e) is not INF


@given(seeds, st.fractions(-3, 3, max_denominator=6))
def test_ball_periodicity(seed, t):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    v = sm.random_norm(field, rng, rng.randint(1, 3))
    assert lattice_equal(ball(v, t + 1), lattice_scale(ball(v, t), field.uniformizer_pow(1)))


@given(seeds)
def test_lattice_norm_roundtrips(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    lat = sm.random_lattice(field, rng, r)
    assert lattice_equal(lattice_from_norm(norm_from_lattice(lat)), lat)
    v = sm.random_norm(field, rng, r, integral=True)
    assert norm_equal(norm_from_lattice(lattice_from_norm(v)), v)


@given(seeds)
def test_floor_ceil_properties(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    v = sm.random_norm(field, rng, rng.randint(1, 3))
    lo, hi = floor_norm(v), ceil_norm(v)
    assert lo.is_integral() and hi.is_integral()
    assert norm_leq(lo, v) and norm_leq(v, hi)
    assert norm_equal(ceil_norm(lo), lo)


@given(seeds)
def test_norm_leq_agrees_with_sampling(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    v = sm.random_norm(field, rng, r)
    w = AdaptedNorm(field, v.basis, tuple(c + sm.random_rational(rng, -1, 1) for c in v.values))
    if rng.random() < 0.5:
        w = sm.random_norm(field, rng, r)
    verdict = norm_leq(v, w)
    vecs = la.columns(v.basis) + la.columns(w.basis) + [sm.random_vector(field, rng, r) for _ in range(30)]
    sampled = all(norm_eval(v, e) <= norm_eval(w, e) for e in vecs)
    if verdict:
        assert sampled
    # oracle: {v >= t} inside {w >= t} at every jump of either norm in one period
    jumps = sorted({c - (c.numerator // c.denominator) for c in v.values + w.values})
    assert verdict == all(lattice_contains(ball(w, t), ball(v, t)) for t in jumps)
    assert norm_equal(v, w) == all(ball(v, t) == ball(w, t) for t in jumps)


@given(seeds, st.integers(-3, 3))
def test_is_adapted_frame_invariance(seed, shift):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    v = sm.random_norm(field, rng, r)
    basis = v.basis if rng.random() < 0.5 else sm.random_invertible(field, rng, r)
    verdict = is_adapted(v, basis)
    assert is_adapted(v.shifted(shift), basis) == verdict
    scale = [sm.random_unit(field, rng) * field.uniformizer_pow(rng.randint(-2, 2)) for _ in range(r)]
    assert is_adapted(v, la.scale_columns(field, basis, scale)) == verdict
    assert is_adapted(v, v.basis)


@given(seeds)
def test_common_adapted_basis_self_verifies(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(2, 3)
    v, w = sm.random_norm(field, rng, r), sm.random_norm(field, rng, r)
    g = common_adapted_basis(v, w)
    assert is_adapted(v, g) and is_adapted(w, g)


def test_common_adapted_basis_integral_rank3():
    rng = random.Random(3)
    for _ in range(200):
        field = sm.random_field(rng)
        v, w = sm.random_norm(field, rng, 3, integral=True), sm.random_norm(field, rng, 3, integral=True)
        g = common_adapted_basis(v, w)
        assert is_adapted(v, g) and is_adapted(w, g)


@given(seeds)
def test_invariant_factors_basis_change(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r = rng.randint(1, 3)
    a, b = sm.random_lattice(field, rng, r), sm.random_lattice(field, rng, r)
    inv = invariant_factors(a, b)
    assert list(inv.exponents) == sorted(inv.exponents, reverse=True)
    assert lattice_equal(hnf(field, inv.basis), a)
    scaled = la.scale_columns(field, inv.basis, [field.uniformizer_pow(e) for e in inv.exponents])
    assert lattice_equal(hnf(field, scaled), b)
    swapped = invariant_factors(b, a).exponents
    assert swapped == tuple(sorted((-e for e in inv.exponents), reverse=True))


@given(seeds)
def test_diagonal_sum_intersection_componentwise(seed):
    rng = random.Random(seed)
    r = rng.randint(1, 4)
    ea = [rng.randint(-3, 3) for _ in range(r)]
    eb = [rng.randint(-3, 3) for _ in range(r)]
    a, b = diagonal_lattice(Q, ea), diagonal_lattice(Q, eb)
    assert lattice_equal(lattice_sum(a, b), diagonal_lattice(Q, [min(x, y) for x, y in zip(ea, eb)]))
    assert lattice_equal(lattice_intersect(a, b), diagonal_lattice(Q, [max(x, y) for x, y in zip(ea, eb)]))


@given(seeds)
def test_pullback_leq_agrees_with_sampling(seed):
    rng = random.Random(seed)
    field = sm.random_field(rng)
    r, s = rng.randint(1, 3), rng.randint(1, 3)
    v, w = sm.random_norm(field, rng, r), sm.random_norm(field, rng, s)
    f = sm.random_matrix(field, rng, s, r, -1, 2)
    verdict = pullback_leq(f, v, w)
    vecs = la.columns(v.basis) + [sm.random_vector(field, rng, r) for _ in range(20)]
    assert verdict == all(norm_eval(v, e) <= norm_eval(w, la.mat_vec(field, f, e)) for e in vecs)
