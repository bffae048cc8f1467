"""Lattices, additive norms and prevaluations on ``E = K^r``.

A lattice is stored in a canonical lower-triangular Hermite form over ``O``:
column ``i`` has zeros above row ``i``, the pivot in row ``i`` is exactly
``pi^a_i``, and every entry left of a pivot is the canonical representative
of its class modulo ``pi^a_i O`` (see :meth:`FieldSpec.truncate`).  Two
lattices are equal iff their canonical matrices are equal.

An :class:`AdaptedNorm` is a basis together with rational values on it; it
represents ``v(sum l_i b_i) = min(val(l_i) + c_i)``.  Several presentations
can describe the same norm, so norms are compared with :func:`norm_equal`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property

from . import linalg as la
from .errors import (
    DimensionMismatch,
    NonIntegralNorm,
    RankDeficient,
    Singular,
)
from .valfield import INF, FieldSpec, ceil_q, floor_q, frac_part

__all__ = [
    "Lattice",
    "AdaptedNorm",
    "Prevaluation",
    "InvariantFactors",
    "hnf",
    "lattice_from_columns",
    "standard_lattice",
    "diagonal_lattice",
    "lattice_contains",
    "lattice_contains_vector",
    "lattice_equal",
    "lattice_sum",
    "lattice_intersect",
    "lattice_scale",
    "dual_lattice",
    "norm_eval",
    "ball",
    "norm_from_lattice",
    "lattice_from_norm",
    "floor_norm",
    "ceil_norm",
    "norm_leq",
    "norm_equal",
    "is_adapted",
    "invariant_factors",
    "common_adapted_basis",
    "pullback_check",
    "pullback_leq",
    "thresholds",
]


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    field: FieldSpec
    matrix: la.Matrix = dc_field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def columns(self) -> list:
        return la.columns(self.matrix)

    def exponents(self) -> tuple:
        """Valuations of the pivots, top to bottom."""
        return tuple(self.field.val(self.matrix[i][i]) for i in range(self.rank))

    def __repr__(self):
        rows = [[self.field.format(x) for x in row] for row in self.matrix]
        return f"Lattice({rows})"


def hnf(field: FieldSpec, generators) -> Lattice:
    """Canonical form of the ``O``-span of the columns of an ``r x k`` matrix."""
    rows = la.coerce_matrix(field, generators)
    r, k = la.shape(rows)
    if r == 0 or k < r:
        raise RankDeficient(f"{k} generators cannot span K^{r}")
    cols = [list(c) for c in zip(*rows)]
    exps = []
    for i in range(r):
        best = None
        for j in range(i, len(cols)):
            x = cols[j][i]
            if x != 0:
                v = field.val(x)
                if best is None or v < best[0]:
                    best = (v, j)
        if best is None:
            raise RankDeficient("generators do not span E")
        a, j0 = best
        cols[i], cols[j0] = cols[j0], cols[i]
        pivot_power = field.uniformizer_pow(a)
        unit = cols[i][i] / pivot_power
        if unit != 1:
            cols[i] = [x / unit for x in cols[i]]
        cols[i][i] = pivot_power
        for j in range(i + 1, len(cols)):
            x = cols[j][i]
            if x != 0:
                q = x / pivot_power
                cols[j] = [y - q * z for y, z in zip(cols[j], cols[i])]
                cols[j][i] = field.zero
        exps.append(a)
    cols = cols[:r]
    for i in range(r):
        pivot_power = cols[i][i]
        for j in range(i):
            x = cols[j][i]
            if x == 0:
                continue
            rep = field.truncate(x, exps[i])
            if rep != x:
                q = (x - rep) / pivot_power
                cols[j] = [y - q * z for y, z in zip(cols[j], cols[i])]
                cols[j][i] = rep
    return Lattice(field, la.from_columns([tuple(c) for c in cols]))


def lattice_from_columns(field: FieldSpec, cols) -> Lattice:
    return hnf(field, la.from_columns([tuple(field.coerce(x) for x in c) for c in cols]))


def standard_lattice(field: FieldSpec, r: int) -> Lattice:
    return Lattice(field, la.identity(field, r))


def diagonal_lattice(field: FieldSpec, exps, basis=None) -> Lattice:
    """``sum_i O pi^{exps_i} b_i`` for the given basis (standard by default)."""
    r = len(exps)
    if basis is None:
        basis = la.identity(field, r)
    powers = [field.uniformizer_pow(a) for a in exps]
    return hnf(field, la.scale_columns(field, la.coerce_matrix(field, basis), powers))


def _check_rank(a, b):
    if a.rank != b.rank:
        raise DimensionMismatch(f"rank {a.rank} vs rank {b.rank}")
    if a.field != b.field:
        raise DimensionMismatch(f"field {a.field} vs field {b.field}")


def lattice_contains_vector(lat: Lattice, v) -> bool:
    """Forward substitution against the lower-triangular generator matrix."""
    field = lat.field
    m = lat.matrix
    if len(v) != lat.rank:
        raise DimensionMismatch(f"vector of length {len(v)} in rank {lat.rank} lattice")
    rest = [field.coerce(x) for x in v]
    for i in range(lat.rank):
        if rest[i] == 0:
            continue
        y = rest[i] / m[i][i]
        if field.val(y) < 0:
            return False
        for k in range(i + 1, lat.rank):
            if m[k][i] != 0:
                rest[k] = rest[k] - y * m[k][i]
    return True


def lattice_contains(a: Lattice, b: Lattice) -> bool:
    """True iff ``b`` is a sublattice of ``a``."""
    _check_rank(a, b)
    return all(lattice_contains_vector(a, col) for col in b.columns())


def lattice_equal(a: Lattice, b: Lattice) -> bool:
    _check_rank(a, b)
    return a.matrix == b.matrix


def lattice_sum(a: Lattice, b: Lattice) -> Lattice:
    _check_rank(a, b)
    return hnf(a.field, tuple(ra + rb for ra, rb in zip(a.matrix, b.matrix)))


def dual_lattice(a: Lattice) -> Lattice:
    """``{f : f(a) in O}`` written in the dual standard basis."""
    return hnf(a.field, la.transpose(la.inverse(a.field, a.matrix)))


def lattice_intersect(a: Lattice, b: Lattice) -> Lattice:
    # (A cap B)^dual = A^dual + B^dual
    _check_rank(a, b)
    return dual_lattice(lattice_sum(dual_lattice(a), dual_lattice(b)))


def lattice_scale(a: Lattice, c) -> Lattice:
    c = a.field.coerce(c)
    return hnf(a.field, tuple(tuple(c * x for x in row) for row in a.matrix))


def lattice_image(f, lat: Lattice, target_field: FieldSpec | None = None):
    """Columns of ``F`` applied to the canonical generators of ``lat``."""
    return [la.mat_vec(lat.field, f, col) for col in lat.columns()]


# ---------------------------------------------------------------------------
# norms and prevaluations
# ---------------------------------------------------------------------------

def _as_values(values):
    return tuple(Fraction(v) for v in values)


@dataclass(frozen=True)
class AdaptedNorm:
    """The additive norm with value ``values[i]`` on column ``i`` of ``basis``."""

    field: FieldSpec
    basis: la.Matrix
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "basis", la.coerce_matrix(self.field, self.basis))
        object.__setattr__(self, "values", _as_values(self.values))
        n, k = la.shape(self.basis)
        if n != k or k != len(self.values):
            raise DimensionMismatch(f"basis {n}x{k} with {len(self.values)} values")

    @property
    def rank(self) -> int:
        return len(self.values)

    @cached_property
    def inverse(self):
        return la.inverse(self.field, self.basis)

    def coordinates(self, e):
        return la.mat_vec(self.field, self.inverse, tuple(self.field.coerce(x) for x in e))

    def __call__(self, e):
        return norm_eval(self, e)

    def shifted(self, a) -> "AdaptedNorm":
        out = AdaptedNorm(self.field, self.basis, tuple(c + Fraction(a) for c in self.values))
        if "inverse" in self.__dict__:
            out.__dict__["inverse"] = self.inverse
        return out

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.values)


@dataclass(frozen=True)
class Prevaluation:
    """``v(sum l_i b_i) = min(values_i : l_i != 0)``; a direction at infinity."""

    field: FieldSpec
    basis: la.Matrix
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "basis", la.coerce_matrix(self.field, self.basis))
        object.__setattr__(self, "values", _as_values(self.values))

    @property
    def rank(self) -> int:
        return len(self.values)

    @cached_property
    def inverse(self):
        return la.inverse(self.field, self.basis)

    def __call__(self, e):
        lam = la.mat_vec(self.field, self.inverse, tuple(self.field.coerce(x) for x in e))
        vals = [c for l, c in zip(lam, self.values) if l != 0]
        return min(vals) if vals else INF

    def breakpoints(self) -> list:
        return sorted(set(self.values), reverse=True)

    def filtration(self, j) -> la.Matrix:
        """Canonical basis of ``{e : v(e) >= j}``."""
        cols = la.columns(self.basis)
        return la.subspace(self.field, [c for c, a in zip(cols, self.values) if a >= j], self.rank)

    def flag(self) -> list:
        """``[(j, subspace)]`` at every breakpoint, decreasing in ``j``."""
        return [(j, self.filtration(j)) for j in self.breakpoints()]


@dataclass(frozen=True)
class InvariantFactors:
    exponents: tuple
    basis: la.Matrix = dc_field(default=(), repr=False, compare=False)


def norm_eval(v: AdaptedNorm, e):
    lam = v.coordinates(e)
    best = INF
    for l, c in zip(lam, v.values):
        if l != 0:
            x = v.field.val(l) + c
            if x < best:
                best = x
    return best


def ball(v: AdaptedNorm, t) -> Lattice:
    """The lattice ``{e : v(e) >= t}``."""
    t = Fraction(t)
    return diagonal_lattice(v.field, [ceil_q(t - c) for c in v.values], v.basis)


def thresholds(*norms) -> list:
    """Fractional parts of all values: the jumps of every ball in one period."""
    out = set()
    for v in norms:
        out.update(frac_part(c) for c in v.values)
    return sorted(out)


def norm_from_lattice(lat: Lattice) -> AdaptedNorm:
    return AdaptedNorm(lat.field, lat.matrix, (0,) * lat.rank)


def lattice_from_norm(v: AdaptedNorm) -> Lattice:
    if not v.is_integral():
        raise NonIntegralNorm(f"values {v.values} are not integral")
    return ball(v, 0)


def floor_norm(v: AdaptedNorm) -> AdaptedNorm:
    return AdaptedNorm(v.field, v.basis, tuple(floor_q(c) for c in v.values))


def ceil_norm(v: AdaptedNorm) -> AdaptedNorm:
    return AdaptedNorm(v.field, v.basis, tuple(ceil_q(c) for c in v.values))


def _same_space(v, w):
    if v.rank != w.rank or v.field != w.field:
        raise DimensionMismatch(f"norms on different spaces: rank {v.rank} vs {w.rank}")


def norm_leq(v: AdaptedNorm, w: AdaptedNorm) -> bool:
    """``v(e) <= w(e)`` for every ``e``.

    Checking the adapted basis of ``v`` suffices: ``w(sum l_i b_i) >= min(val l_i + w(b_i))``.
    """
    _same_space(v, w)
    return all(norm_eval(w, b) >= c for b, c in zip(la.columns(v.basis), v.values))


def norm_equal(v: AdaptedNorm, w: AdaptedNorm) -> bool:
    return norm_leq(v, w) and norm_leq(w, v)


def is_adapted(v: AdaptedNorm, basis) -> bool:
    basis = la.coerce_matrix(v.field, basis)
    if la.shape(basis) != (v.rank, v.rank):
        raise DimensionMismatch("basis shape does not match the norm")
    if la.rank(v.field, basis) < v.rank:
        raise Singular("candidate basis is singular")
    values = [norm_eval(v, col) for col in la.columns(basis)]
    return norm_equal(v, AdaptedNorm(v.field, basis, values))


# ---------------------------------------------------------------------------
# simultaneous reduction (Smith form relative to two points of the building)
# ---------------------------------------------------------------------------

def _reduce_pair(field, m, c, d):
    """Find ``X, Y`` with ``X^{-1} m Y`` monomial.

    ``X`` only performs moves that keep the basis adapted to the values
    ``c``, ``Y`` only moves that keep the second basis adapted to ``d``.
    Returns ``(X, Y, D, match)`` where ``match[j]`` is the row of the
    nonzero entry in column ``j`` of ``D``.
    """
    r = len(m)
    m = [list(row) for row in m]
    x = [list(row) for row in la.identity(field, r)]
    y = [list(row) for row in la.identity(field, r)]
    rows_left = list(range(r))
    cols_left = list(range(r))
    match = {}
    while rows_left:
        best = None
        for i in rows_left:
            for j in cols_left:
                if m[i][j] != 0:
                    w = field.val(m[i][j]) + c[i] - d[j]
                    if best is None or w < best[0]:
                        best = (w, i, j)
        if best is None:
            raise Singular("transition matrix is singular")
        _, i0, j0 = best
        piv = m[i0][j0]
        for j in cols_left:
            if j != j0 and m[i0][j] != 0:
                q = m[i0][j] / piv
                for k in range(r):
                    if m[k][j0] != 0:
                        m[k][j] = m[k][j] - q * m[k][j0]
                    if y[k][j0] != 0:
                        y[k][j] = y[k][j] - q * y[k][j0]
        for i in rows_left:
            if i != i0 and m[i][j0] != 0:
                q = m[i][j0] / piv
                m[i][j0] = field.zero
                for k in range(r):
                    if x[k][i] != 0:
                        x[k][i0] = x[k][i0] + q * x[k][i]
        rows_left.remove(i0)
        cols_left.remove(j0)
        match[j0] = i0
    return la.freeze(x), la.freeze(y), la.freeze(m), match


def invariant_factors(a: Lattice, b: Lattice) -> InvariantFactors:
    """Exponents ``a_1 >= ... >= a_r`` and a basis ``g`` of ``a`` with ``{pi^a_i g_i}`` a basis of ``b``."""
    _check_rank(a, b)
    field = a.field
    m = la.mat_mul(field, la.inverse(field, a.matrix), b.matrix)
    zeros = (0,) * a.rank
    x, _, dmat, match = _reduce_pair(field, m, zeros, zeros)
    g_cols = la.columns(la.mat_mul(field, a.matrix, x))
    pairs = sorted(
        ((field.val(dmat[i][j]), i) for j, i in match.items()),
        key=lambda p: (-p[0], p[1]),
    )
    exps = tuple(e for e, _ in pairs)
    basis = la.from_columns([g_cols[i] for _, i in pairs])
    return InvariantFactors(exps, basis)


def common_adapted_basis(v: AdaptedNorm, w: AdaptedNorm) -> la.Matrix:
    """A basis adapted to both norms (two points always share an apartment)."""
    _same_space(v, w)
    field = v.field
    m = la.mat_mul(field, v.inverse, w.basis)
    x, _, _, _ = _reduce_pair(field, m, v.values, w.values)
    g = la.mat_mul(field, v.basis, x)
    if not (is_adapted(v, g) and is_adapted(w, g)):
        raise AssertionError("simultaneous reduction produced a non-adapted basis")
    return g


# ---------------------------------------------------------------------------
# pullbacks
# ---------------------------------------------------------------------------

def pullback_leq(f, v: AdaptedNorm, w: AdaptedNorm) -> bool:
    """``v(e) <= w(F e)`` for all ``e``; ``F`` maps the space of ``v`` to that of ``w``."""
    f = la.coerce_matrix(v.field, f)
    if la.shape(f) != (w.rank, v.rank):
        raise DimensionMismatch(f"F has shape {la.shape(f)}, expected {(w.rank, v.rank)}")
    for t in thresholds(v, w):
        target = ball(w, t)
        for col in ball(v, t).columns():
            if not lattice_contains_vector(target, la.mat_vec(v.field, f, col)):
                return False
    return True


def pullback_check(f, v: AdaptedNorm, w: AdaptedNorm) -> bool:
    """``F(Lambda_v) subset Lambda_w`` for integral norms."""
    if not (v.is_integral() and w.is_integral()):
        raise NonIntegralNorm("pullback_check expects integral norms; use pullback_leq")
    return pullback_leq(f, v, w)


def lcm_denominator(values) -> int:
    out = 1
    for c in values:
        out = out * Fraction(c).denominator // math.gcd(out, Fraction(c).denominator)
    return out
