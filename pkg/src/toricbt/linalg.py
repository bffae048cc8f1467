"""Exact dense linear algebra over a :class:`~toricbt.valfield.FieldSpec`.

Matrices are tuples of row tuples.  Vectors are tuples.  Nothing here knows
about valuations; that lives in :mod:`toricbt.latnorm`.
"""
from __future__ import annotations

from .errors import DimensionMismatch, Singular

Matrix = tuple
Vector = tuple


def freeze(rows) -> Matrix:
    return tuple(tuple(row) for row in rows)


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def identity(field, n: int) -> Matrix:
    one, zero = field.one, field.zero
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def diagonal(field, entries) -> Matrix:
    n = len(entries)
    zero = field.zero
    return tuple(tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n))


def coerce_matrix(field, rows) -> Matrix:
    return tuple(tuple(field.coerce(x) for x in row) for row in rows)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def columns(m: Matrix) -> list[Vector]:
    return [tuple(col) for col in zip(*m)]


def from_columns(cols) -> Matrix:
    return tuple(zip(*cols))


def mat_mul(field, a: Matrix, b: Matrix) -> Matrix:
    if shape(a)[1] != len(b):
        raise DimensionMismatch(f"cannot multiply {shape(a)} by {shape(b)}")
    bt = transpose(b)
    zero = field.zero
    out = []
    for row in a:
        out_row = []
        for col in bt:
            acc = zero
            for x, y in zip(row, col):
                if x != 0 and y != 0:
                    acc = acc + x * y
            out_row.append(acc)
        out.append(tuple(out_row))
    return tuple(out)


def mat_vec(field, a: Matrix, v: Vector) -> Vector:
    if shape(a)[1] != len(v):
        raise DimensionMismatch(f"cannot apply {shape(a)} matrix to vector of length {len(v)}")
    zero = field.zero
    out = []
    for row in a:
        acc = zero
        for x, y in zip(row, v):
            if x != 0 and y != 0:
                acc = acc + x * y
        out.append(acc)
    return tuple(out)


def scale_columns(field, m: Matrix, factors) -> Matrix:
    return tuple(tuple(x * f for x, f in zip(row, factors)) for row in m)


def _rref(field, rows):
    """Row-reduce a list of row lists in place; returns pivot columns."""
    rows = [list(r) for r in rows]
    pivots = []
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.one / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return rows, pivots


def rank(field, m: Matrix) -> int:
    if not m:
        return 0
    return len(_rref(field, m)[1])


def inverse(field, m: Matrix) -> Matrix:
    n, k = shape(m)
    if n != k:
        raise DimensionMismatch(f"inverse of non-square {n}x{k} matrix")
    ident = identity(field, n)
    aug = [list(row) + list(irow) for row, irow in zip(m, ident)]
    red, pivots = _rref(field, aug)
    if pivots[:n] != list(range(n)):
        raise Singular("matrix is not invertible")
    return tuple(tuple(row[n:]) for row in red)


def solve(field, m: Matrix, v: Vector) -> Vector:
    """Solve ``m x = v`` for square invertible ``m``."""
    return mat_vec(field, inverse(field, m), v)


def is_zero_vector(v) -> bool:
    return all(x == 0 for x in v)


# ---------------------------------------------------------------------------
# subspaces of K^r
# ---------------------------------------------------------------------------

def subspace(field, vectors, dim: int) -> Matrix:
    """Canonical basis (rows in reduced echelon form) of the span of ``vectors``."""
    vecs = [tuple(v) for v in vectors if not is_zero_vector(v)]
    if not vecs:
        return ()
    red, pivots = _rref(field, vecs)
    return tuple(tuple(red[i]) for i in range(len(pivots)))


def subspace_sum(field, a: Matrix, b: Matrix, dim: int) -> Matrix:
    return subspace(field, list(a) + list(b), dim)


def nullspace(field, m: Matrix, n_cols: int) -> list[Vector]:
    """Basis of ``{x : m x = 0}``."""
    if not m:
        return [tuple(field.one if i == j else field.zero for j in range(n_cols)) for i in range(n_cols)]
    red, pivots = _rref(field, m)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        x = [field.zero] * n_cols
        x[f] = field.one
        for i, p in enumerate(pivots):
            x[p] = -red[i][f]
        basis.append(tuple(x))
    return basis


def subspace_intersect(field, a: Matrix, b: Matrix, dim: int) -> Matrix:
    """Intersection of two spans, via the kernel of ``[A | -B]``."""
    if not a or not b:
        return ()
    cols = [tuple(v) for v in a] + [tuple(-x for x in v) for v in b]
    m = from_columns(cols)
    ker = nullspace(field, m, len(cols))
    vecs = []
    for k in ker:
        coeffs = k[: len(a)]
        vec = [field.zero] * dim
        for c, v in zip(coeffs, a):
            if c != 0:
                vec = [x + c * y for x, y in zip(vec, v)]
        vecs.append(tuple(vec))
    return subspace(field, vecs, dim)


def in_span(field, span: Matrix, v: Vector, dim: int) -> bool:
    if is_zero_vector(v):
        return True
    return len(subspace(field, list(span) + [tuple(v)], dim)) == len(span)
