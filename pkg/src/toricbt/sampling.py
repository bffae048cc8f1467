"""Random instances: scalars, lattices, norms and glued piecewise affine maps.

Used by the test-suite and by the sampled cross-check of ``toricbt hom``.
All generators take a :class:`random.Random` so runs are reproducible.
"""
from __future__ import annotations

import random
from fractions import Fraction

from . import linalg as la
from .latnorm import AdaptedNorm, Lattice, hnf, norm_eval
from .pamap import PAMap, PAPiece, eval_at
from .polyhedral import Complex, Face, Polyhedron, pairing
from .valfield import FieldSpec, LaurentField, PAdicField


def random_unit(field: FieldSpec, rng: random.Random):
    if isinstance(field, PAdicField):
        while True:
            a = rng.randint(-20, 20)
            b = rng.randint(1, 20)
            x = Fraction(a, b)
            if x != 0 and field.val(x) == 0:
                return x
    c0 = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
    coeffs = [c0] + [Fraction(rng.randint(-2, 2)) for _ in range(rng.randint(0, 2))]
    t = field.uniformizer_pow(1)
    num = field.zero
    for k, c in enumerate(coeffs):
        num = num + field.coerce(c) * t ** k
    den = field.one + field.coerce(rng.randint(-2, 2)) * t
    return num / den


def random_scalar(field: FieldSpec, rng: random.Random, lo: int = -2, hi: int = 2, zero_prob: float = 0.15):
    if rng.random() < zero_prob:
        return field.zero
    return random_unit(field, rng) * field.uniformizer_pow(rng.randint(lo, hi))


def random_vector(field: FieldSpec, rng: random.Random, r: int, lo: int = -2, hi: int = 2) -> tuple:
    while True:
        v = tuple(random_scalar(field, rng, lo, hi) for _ in range(r))
        if not la.is_zero_vector(v):
            return v


def random_invertible(field: FieldSpec, rng: random.Random, r: int, lo: int = -2, hi: int = 2) -> la.Matrix:
    while True:
        m = tuple(tuple(random_scalar(field, rng, lo, hi) for _ in range(r)) for _ in range(r))
        if la.rank(field, m) == r:
            return m


def random_matrix(field: FieldSpec, rng: random.Random, rows: int, cols: int, lo: int = -2, hi: int = 2):
    return tuple(tuple(random_scalar(field, rng, lo, hi) for _ in range(cols)) for _ in range(rows))


def random_lattice(field: FieldSpec, rng: random.Random, r: int) -> Lattice:
    return hnf(field, random_invertible(field, rng, r))


def random_rational(rng: random.Random, lo: int = -3, hi: int = 3, dens=(1, 2, 3, 4, 6)) -> Fraction:
    d = rng.choice(dens)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_norm(field: FieldSpec, rng: random.Random, r: int, integral: bool = False) -> AdaptedNorm:
    basis = random_invertible(field, rng, r)
    if integral:
        values = [Fraction(rng.randint(-2, 2)) for _ in range(r)]
    else:
        values = [random_rational(rng, -2, 2) for _ in range(r)]
    return AdaptedNorm(field, basis, values)


def random_field(rng: random.Random, primes=(2, 3)) -> FieldSpec:
    if rng.random() < 0.25:
        return LaurentField()
    return PAdicField(rng.choice(primes))


# ---------------------------------------------------------------------------
# random glued maps
# ---------------------------------------------------------------------------

def _stabilizer_move(field, rng, values_at, slopes):
    """Unipotent ``M`` fixing the norm with the given values and the flags of the given slopes."""
    r = len(values_at[0])
    m = [[field.one if i == j else field.zero for j in range(r)] for i in range(r)]
    order = list(range(r))
    rng.shuffle(order)
    for a in range(r):
        for b in range(a + 1, r):
            i, j = order[a], order[b]
            if rng.random() < 0.5:
                continue
            if any(s[i] < s[j] for s in slopes):
                continue
            # new column j picks up lambda * b_i with val(lambda) + c_i >= c_j
            need = max((vals[j] - vals[i]) for vals in values_at)
            k = -((-need.numerator) // need.denominator) if isinstance(need, Fraction) else need
            m[i][j] = random_unit(field, rng) * field.uniformizer_pow(int(k) + rng.randint(0, 1))
    return tuple(tuple(row) for row in m)


def _apply(field, basis, m):
    return la.mat_mul(field, basis, m)


def random_chain_map(field: FieldSpec, rng: random.Random, r: int, cells: int = 3) -> PAMap:
    """A glued map on a subdivision of the line with rational breakpoints."""
    pts = sorted({random_rational(rng, -3, 3, dens=(1, 2, 3)) for _ in range(cells - 1)})
    polys = [Polyhedron("c0", [[pts[0]]], [[-1]])]
    for k in range(len(pts) - 1):
        polys.append(Polyhedron(f"c{k + 1}", [[pts[k]], [pts[k + 1]]]))
    polys.append(Polyhedron(f"c{len(pts)}", [[pts[-1]]], [[1]]))
    faces = [Face((polys[k].id, polys[k + 1].id), Polyhedron(f"f{k}", [[pts[k]]])) for k in range(len(pts))]
    basis = random_invertible(field, rng, r, -1, 1)
    chars = [(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(r)]
    pieces = [PAPiece(polys[0].id, basis, chars)]
    for k, x in enumerate(pts):
        d = x.denominator
        new_chars = []
        for a, b in chars:
            a2 = a + d * rng.randint(-1, 1)
            b2 = b + (a - a2) * x
            new_chars.append((a2, int(b2)))
        values = [pairing(u, (x,)) for u in chars]
        m = _stabilizer_move(field, rng, [values], [])
        basis = _apply(field, basis, m)
        chars = new_chars
        pieces.append(PAPiece(polys[k + 1].id, basis, chars))
    return PAMap(field, Complex(polys, faces), r, pieces)


def random_fan_map(field: FieldSpec, rng: random.Random, r: int, cones: int = 2) -> PAMap:
    """A glued map on consecutive cones of the upper half plane based at a rational point."""
    dirs = [(1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1), (-1, 0)]
    idx = sorted(rng.sample(range(len(dirs)), cones + 1))
    rays = [dirs[i] for i in idx]
    p = (random_rational(rng, -1, 1, dens=(1, 2)), random_rational(rng, -1, 1, dens=(1, 2)))
    polys = [Polyhedron(f"s{k}", [p], [rays[k], rays[k + 1]]) for k in range(cones)]
    faces = [
        Face((polys[k].id, polys[k + 1].id), Polyhedron(f"g{k}", [p], [rays[k + 1]])) for k in range(cones - 1)
    ]
    for k in range(cones):
        for l in range(k + 2, cones):
            faces.append(Face((polys[k].id, polys[l].id), Polyhedron(f"a{k}{l}", [p])))
    basis = random_invertible(field, rng, r, -1, 1)
    chars = [(rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(r)]
    pieces = [PAPiece(polys[0].id, basis, chars)]
    for k in range(cones - 1):
        w = rays[k + 1]
        perp = (-w[1], w[0])
        tp = perp[0] * p[0] + perp[1] * p[1]
        step = tp.denominator
        new_chars = []
        for u in chars:
            alpha = step * rng.randint(-1, 1)
            new_chars.append((u[0] + alpha * perp[0], u[1] + alpha * perp[1], u[2] - int(alpha * tp)))
        values = [pairing(u, p) for u in chars]
        slopes = [tuple(u[0] * w[0] + u[1] * w[1] for u in chars)]
        m = _stabilizer_move(field, rng, [values], slopes)
        basis = _apply(field, basis, m)
        chars = new_chars
        pieces.append(PAPiece(polys[k + 1].id, basis, chars))
    return PAMap(field, Complex(polys, faces), r, pieces)


def random_map(field: FieldSpec, rng: random.Random, r: int) -> PAMap:
    if rng.random() < 0.5:
        return random_chain_map(field, rng, r, rng.randint(2, 4))
    return random_fan_map(field, rng, r, rng.randint(2, 3))


def mutate_map(phi: PAMap, rng: random.Random) -> tuple:
    """Change one field of one piece next to a declared face so that gluing breaks there."""
    f = rng.choice(phi.complex.faces)
    cid = rng.choice([c for c in f.cells if c in phi.pieces])
    piece = phi.pieces[cid]
    i = rng.randrange(phi.rank)
    pieces = []
    kind = rng.choice(["char", "basis"])
    for p in phi.pieces.values():
        if p.cell != cid:
            pieces.append(p)
            continue
        if kind == "char":
            chars = [list(u) for u in p.chars]
            chars[i][-1] += rng.choice([-1, 1])
            pieces.append(PAPiece(p.cell, p.basis, chars))
        else:
            s = phi.field.uniformizer_pow(rng.choice([-1, 1]))
            basis = tuple(tuple(x * s if j == i else x for j, x in enumerate(row)) for row in p.basis)
            pieces.append(PAPiece(p.cell, basis, p.chars))
    return PAMap(phi.field, phi.complex, phi.rank, pieces), {"cell": cid, "index": i, "kind": kind}


# ---------------------------------------------------------------------------
# sampled condition (c)
# ---------------------------------------------------------------------------

def random_point(cell: Polyhedron, rng: random.Random, spread: int = 4) -> tuple:
    weights = [Fraction(rng.randint(0, 6)) for _ in cell.vertices]
    if sum(weights) == 0:
        weights[0] = Fraction(1)
    total = sum(weights)
    x = [Fraction(0)] * cell.dim_ambient
    for wgt, v in zip(weights, cell.vertices):
        x = [a + wgt / total * b for a, b in zip(x, v)]
    for w in cell.rays:
        t = Fraction(rng.randint(0, 4 * spread), rng.choice([1, 2, 3]))
        x = [a + t * b for a, b in zip(x, w)]
    return tuple(x)


def sample_points(phi: PAMap, rng: random.Random, n: int) -> list:
    pts = list(phi.vertices())
    for c in phi.piece_cells():
        for v in c.vertices:
            for w in c.rays:
                pts.append(tuple(a + 50 * b for a, b in zip(v, w)))
    cells = phi.piece_cells()
    while len(pts) < n:
        pts.append(random_point(rng.choice(cells), rng))
    return pts[:max(n, 1)]


def sample_vectors(phi: PAMap, rng: random.Random, n: int) -> list:
    vecs = []
    for p in phi.pieces.values():
        vecs.extend(la.columns(p.basis))
    while len(vecs) < n:
        vecs.append(random_vector(phi.field, rng, phi.rank))
    return vecs[:max(n, 1)]


def sampled_violation(phi: PAMap, psi: PAMap, f, rng: random.Random, n_points: int, n_vectors: int):
    """First ``(x, e)`` found with ``phi(x)(e) > psi(x)(F e)``, or ``None``."""
    field = phi.field
    vecs = sample_vectors(phi, rng, n_vectors)
    for x in sample_points(phi, rng, n_points):
        a, b = eval_at(phi, x), eval_at(psi, x)
        for e in vecs:
            if norm_eval(a, e) > norm_eval(b, la.mat_vec(field, f, e)):
                return x, e
    return None
