"""Piecewise affine maps from a polyhedral complex to the extended building.

Each maximal cell carries a piece: a basis ``b_1..b_r`` of ``E`` and integral
affine characters ``u_1..u_r``.  At a point ``x`` of the cell the map takes
the norm with value ``<u_i, x>`` on ``b_i``.  Along a recession ray ``w`` the
piece induces the prevaluation with value ``<u_i, w>`` on ``b_i`` and the flag
``G^w_j = span{b_i : <u_i, w> >= j}``.

The Klyachko filtrations (:func:`linear_part`) are the flags ``G^w`` so they
agree across glued cells.  The weight modules (:func:`vertex_lattice`,
:func:`cone_module`) follow the sign convention of the section lattices
``sum_i pi^{ceil(<u_i - u, v>)} O b_i``; they are computed on one cell and
report whether the other cells through the same point agree.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product

from . import linalg as la
from . import tree
from .errors import (
    CellMismatch,
    CellNotFound,
    DimensionMismatch,
    PointOutsideCell,
    Singular,
    VertexNotFound,
)
from .latnorm import (
    AdaptedNorm,
    Lattice,
    Prevaluation,
    ball,
    common_adapted_basis,
    diagonal_lattice,
    hnf,
    is_adapted,
    lattice_contains_vector,
    lattice_equal,
    lattice_intersect,
    lattice_sum,
    lattice_scale,
    norm_equal,
    thresholds,
)
from .polyhedral import (
    Complex,
    Polyhedron,
    Report,
    pairing,
    pairing_ray,
    validate_complex,
    vertex_multiplicity,
)
from .valfield import FieldSpec, ceil_q

DEFAULT_BUDGET_DEPTH = 3
RAY_CAP = 2 ** 16
TRIPLE_BUDGET = 400


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PAPiece:
    cell: object
    basis: la.Matrix
    chars: tuple

    def __post_init__(self):
        object.__setattr__(self, "chars", tuple(tuple(int(a) for a in u) for u in self.chars))

    def values_at(self, x) -> tuple:
        return tuple(pairing(u, x) for u in self.chars)

    def slopes(self, w) -> tuple:
        return tuple(pairing_ray(u, w) for u in self.chars)


class PAMap:
    def __init__(self, field: FieldSpec, complex_: Complex, rank: int, pieces):
        self.field = field
        self.complex = complex_
        self.rank = rank
        self.pieces = {}
        n = complex_.dim
        for p in pieces:
            basis = la.coerce_matrix(field, p.basis)
            if la.shape(basis) != (rank, rank):
                raise DimensionMismatch(f"piece on {p.cell!r}: basis shape {la.shape(basis)} for rank {rank}")
            if la.rank(field, basis) < rank:
                raise Singular(f"piece on {p.cell!r}: basis is singular")
            if len(p.chars) != rank or any(len(u) != n + 1 for u in p.chars):
                raise DimensionMismatch(f"piece on {p.cell!r}: expected {rank} characters of length {n + 1}")
            complex_.cell(p.cell)
            self.pieces[p.cell] = PAPiece(p.cell, basis, p.chars)

    def piece(self, cid) -> PAPiece:
        try:
            return self.pieces[cid]
        except KeyError:
            raise CellNotFound(f"no piece on cell {cid!r}") from None

    def piece_cells(self) -> list:
        return [c for c in self.complex.cells if c.id in self.pieces]

    def carrier(self, cid) -> list:
        """Cells with pieces that contain cell ``cid``."""
        cell = self.complex.cell(cid)
        if cid in self.pieces:
            return [cell]
        return [c for c in self.piece_cells() if c.contains_polyhedron(cell)]

    def cells_at(self, x) -> list:
        return [c for c in self.piece_cells() if c.contains(x)]

    def vertices(self) -> list:
        return self.complex.vertices()

    def rays(self) -> list:
        out = []
        for c in self.piece_cells():
            for w in c.rays:
                if w not in out:
                    out.append(w)
        return out


def piece_norm(field: FieldSpec, piece: PAPiece, x) -> AdaptedNorm:
    return AdaptedNorm(field, piece.basis, piece.values_at(x))


def piece_prevaluation(field: FieldSpec, piece: PAPiece, w) -> Prevaluation:
    return Prevaluation(field, piece.basis, piece.slopes(w))


def _flag_breakpoints(*pvs) -> list:
    js = set()
    for pv in pvs:
        js.update(pv.values)
    return sorted(js, reverse=True)


def flags_equal(p: Prevaluation, q: Prevaluation) -> object:
    """``None`` when the flags agree, else the first breakpoint where they differ."""
    for j in _flag_breakpoints(p, q):
        if p.filtration(j) != q.filtration(j):
            return j
    return None


# ---------------------------------------------------------------------------
# evaluation and gluing
# ---------------------------------------------------------------------------

def eval_map(phi: PAMap, cid, x) -> AdaptedNorm:
    x = tuple(Fraction(c) for c in x)
    cell = phi.complex.cell(cid)
    if not cell.contains(x):
        raise PointOutsideCell(f"point {[str(c) for c in x]} is not in cell {cid!r}")
    carriers = phi.carrier(cid)
    if not carriers:
        raise CellNotFound(f"no piece covers cell {cid!r}")
    return piece_norm(phi.field, phi.pieces[carriers[0].id], x)


def eval_at(phi: PAMap, x) -> AdaptedNorm:
    x = tuple(Fraction(c) for c in x)
    cells = phi.cells_at(x)
    if not cells:
        raise PointOutsideCell(f"point {[str(c) for c in x]} is not in the support")
    return piece_norm(phi.field, phi.pieces[cells[0].id], x)


def _fmt_point(x):
    return [str(Fraction(c)) for c in x]


def _compare_pieces(phi, c1, c2, face: Polyhedron, rep: Report):
    p1, p2 = phi.pieces[c1.id], phi.pieces[c2.id]
    for v in face.vertices:
        n1, n2 = piece_norm(phi.field, p1, v), piece_norm(phi.field, p2, v)
        if not norm_equal(n1, n2):
            rep.add(
                "vertex_mismatch",
                cells=[c1.id, c2.id],
                vertex=_fmt_point(v),
                values=[[str(c) for c in n1.values], [str(c) for c in n2.values]],
            )
    for w in face.rays:
        j = flags_equal(piece_prevaluation(phi.field, p1, w), piece_prevaluation(phi.field, p2, w))
        if j is not None:
            rep.add("ray_mismatch", cells=[c1.id, c2.id], ray=list(w), j=str(j))


def validate_gluing(phi: PAMap) -> Report:
    rep = validate_complex(phi.complex)
    for c in phi.complex.maximal_cells():
        if c.id not in phi.pieces:
            rep.add("missing_piece", cell=c.id)
    for f in phi.complex.faces:
        try:
            groups = [phi.carrier(cid) for cid in f.cells]
        except CellNotFound:
            continue
        cells = []
        for g in groups:
            for c in g:
                if all(c.id != d.id for d in cells):
                    cells.append(c)
        for c1, c2 in combinations(cells, 2):
            _compare_pieces(phi, c1, c2, f.face, rep)
    declared = {frozenset(f.cells) for f in phi.complex.faces}
    for c1, c2 in combinations(phi.piece_cells(), 2):
        if frozenset((c1.id, c2.id)) in declared:
            continue
        for w in c1.rays:
            if w in c2.rays:
                p1 = piece_prevaluation(phi.field, phi.pieces[c1.id], w)
                p2 = piece_prevaluation(phi.field, phi.pieces[c2.id], w)
                if flags_equal(p1, p2) is not None:
                    rep.warn("inconsistent_shared_ray", cells=[c1.id, c2.id], ray=list(w))
    return rep


def piece_equiv(cell: Polyhedron, p: PAPiece, q: PAPiece, field: FieldSpec) -> bool:
    if p.cell != q.cell or p.cell != cell.id:
        raise CellMismatch(f"pieces on {p.cell!r} and {q.cell!r} compared on {cell.id!r}")
    if len(p.chars) != len(q.chars):
        raise DimensionMismatch("pieces of different rank")
    for v in cell.vertices:
        if not norm_equal(piece_norm(field, p, v), piece_norm(field, q, v)):
            return False
    for w in cell.rays:
        if flags_equal(piece_prevaluation(field, p, w), piece_prevaluation(field, q, w)) is not None:
            return False
    return True


# ---------------------------------------------------------------------------
# weight modules
# ---------------------------------------------------------------------------

def _as_character(u, n):
    u = tuple(int(a) for a in u)
    if len(u) == n:
        return u + (0,)
    if len(u) == n + 1 and u[-1] == 0:
        return u
    raise DimensionMismatch(f"character {list(u)} is not in M of rank {n}")


def _vertex_exponents(piece: PAPiece, v, u) -> list:
    s = pairing(u, v)
    return [ceil_q(c - s) for c in piece.values_at(v)]


def vertex_lattice(phi: PAMap, v, u, cell=None) -> Lattice:
    v = tuple(Fraction(c) for c in v)
    if v not in phi.vertices():
        raise VertexNotFound(f"{_fmt_point(v)} is not a vertex of the complex")
    u = _as_character(u, phi.complex.dim)
    if cell is None:
        cells = phi.cells_at(v)
        if not cells:
            raise VertexNotFound(f"no piece contains {_fmt_point(v)}")
        cell = cells[0].id
    piece = phi.piece(cell)
    return diagonal_lattice(phi.field, _vertex_exponents(piece, v, u), piece.basis)


def vertex_lattice_consistent(phi: PAMap, v, u) -> bool:
    lats = [vertex_lattice(phi, v, u, c.id) for c in phi.cells_at(v)]
    return all(lattice_equal(lats[0], m) for m in lats[1:])


@dataclass(frozen=True)
class ConeModule:
    """``sum_{i in support} pi^{exponents[i]} O b_i`` inside ``E``."""

    field: FieldSpec
    basis: la.Matrix
    support: tuple
    exponents: tuple

    def canonical(self) -> tuple:
        """Support and the canonical form of the module in the coordinates of ``support``."""
        k = len(self.support)
        if not k:
            return ((), ())
        lat = diagonal_lattice(self.field, [self.exponents[i] for i in self.support])
        return (self.support, lat.matrix)

    def generators(self) -> list:
        cols = la.columns(self.basis)
        out = []
        for i in self.support:
            s = self.field.uniformizer_pow(self.exponents[i])
            out.append(tuple(s * x for x in cols[i]))
        return out

    def to_json(self) -> dict:
        return {
            "support": list(self.support),
            "exponents": [self.exponents[i] for i in self.support],
            "generators": [[self.field.format(x) for x in g] for g in self.generators()],
        }


def _max_cell(phi, cid):
    carriers = phi.carrier(cid)
    if not carriers:
        raise CellNotFound(f"no piece covers cell {cid!r}")
    return carriers[0]


def cone_module(phi: PAMap, cid, u) -> ConeModule:
    cell = phi.complex.cell(cid)
    piece = phi.pieces[_max_cell(phi, cid).id]
    u = _as_character(u, phi.complex.dim)
    support = tuple(
        i for i, ui in enumerate(piece.chars)
        if all(pairing_ray(tuple(a - b for a, b in zip(ui, u)), w) <= 0 for w in cell.rays)
    )
    exps = [max(e) for e in zip(*(_vertex_exponents(piece, v, u) for v in cell.vertices))]
    return ConeModule(phi.field, piece.basis, support, tuple(exps))


def cone_module_by_intersection(phi: PAMap, cid, u) -> tuple:
    """Cross-check of :func:`cone_module`: intersect the vertex lattices and cut to the support."""
    cell = phi.complex.cell(cid)
    piece = phi.pieces[_max_cell(phi, cid).id]
    u = _as_character(u, phi.complex.dim)
    field = phi.field
    lat = None
    for v in cell.vertices:
        lv = diagonal_lattice(field, _vertex_exponents(piece, v, u), piece.basis)
        lat = lv if lat is None else lattice_intersect(lat, lv)
    support = []
    for i, ui in enumerate(piece.chars):
        # the ray lattices impose no bound on b_i exactly when <u_i - u, w> <= 0
        diff = tuple(a - b for a, b in zip(ui, u))
        if all(pairing_ray(diff, w) <= 0 for w in cell.rays):
            support.append(i)
    if not support:
        return ((), ())
    r = phi.rank
    # coordinates in the piece basis, support moved last; lower-triangular
    # canonical form then puts the intersection with that subspace in the last columns
    order = [i for i in range(r) if i not in support] + support
    inv = la.inverse(field, piece.basis)
    coords = [la.mat_vec(field, inv, g) for g in lat.columns()]
    permuted = la.from_columns([tuple(g[i] for i in order) for g in coords])
    h = hnf(field, permuted)
    k = len(support)
    tail = [col[r - k:] for col in h.columns()[r - k:]]
    return (tuple(support), hnf(field, la.from_columns(tail)).matrix)


# ---------------------------------------------------------------------------
# generic fiber
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KlyachkoEntry:
    ray: tuple
    cell: object
    filtration: tuple  # ((j, subspace rows), ...) decreasing in j

    def subspace(self, j, rank):
        """``E^ray_j`` for any integer ``j``."""
        best = None
        for jj, sub in self.filtration:
            if jj >= j:
                best = sub
        if best is None:
            return ()
        return best

    def to_json(self, field: FieldSpec) -> dict:
        return {
            "ray": list(self.ray),
            "filtration": [
                {"j": int(j), "subspace": [[field.format(x) for x in row] for row in sub]}
                for j, sub in self.filtration
            ],
        }


@dataclass
class LinearPart:
    entries: list
    prevaluations: dict = dc_field(default_factory=dict)
    inconsistent: list = dc_field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.inconsistent


def klyachko_filtration(field: FieldSpec, piece: PAPiece, w) -> tuple:
    pv = Prevaluation(field, piece.basis, piece.slopes(w))
    return tuple((j, pv.filtration(j)) for j in pv.breakpoints())


def linear_part(phi: PAMap) -> LinearPart:
    out = LinearPart([])
    seen = {}
    for c in phi.piece_cells():
        piece = phi.pieces[c.id]
        for w in c.rays:
            out.prevaluations[(c.id, w)] = piece_prevaluation(phi.field, piece, w)
            filt = klyachko_filtration(phi.field, piece, w)
            if w not in seen:
                seen[w] = filt
                out.entries.append(KlyachkoEntry(w, c.id, filt))
            elif seen[w] != filt:
                out.inconsistent.append({"ray": list(w), "cell": c.id})
    return out


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

def _egcd(a, b):
    if b == 0:
        return (a, 1, 0)
    g, x, y = _egcd(b, a % b)
    return (g, y, x - (a // b) * y)


def _character_for(v, s) -> tuple:
    """An integral ``u`` with ``<u, v> = s (mod 1)``; ``s`` must lie in the subgroup generated by ``v``."""
    d = vertex_multiplicity(v)
    nums = [int(Fraction(c) * d) for c in v]
    k = int(Fraction(s) * d) % d
    g, coeffs = 0, [0] * len(v)
    for i, a in enumerate(nums):
        gg, x, y = _egcd(g, a)
        coeffs = [x * c for c in coeffs]
        coeffs[i] += y
        g = gg
    if k == 0:
        return tuple(0 for _ in v)
    # g * y = k (mod d)
    h = math.gcd(g, d)
    if k % h:
        raise ValueError(f"{s} is not a value of <u, v> mod 1")
    y = (k // h) * pow(g // h, -1, d // h) % (d // h)
    return tuple(y * c for c in coeffs)


@dataclass(frozen=True)
class MorphismResult:
    ok: bool
    witness: dict = None

    def __bool__(self):
        return self.ok


def _same_support(phi, psi):
    if set(phi.pieces) != set(psi.pieces):
        raise CellMismatch("maps are defined on different cells")
    for cid in phi.pieces:
        a, b = phi.complex.cell(cid), psi.complex.cell(cid)
        if a.vertices != b.vertices or a.rays != b.rays:
            raise CellMismatch(f"cell {cid!r} differs between the two complexes")


def _subspace_image_inside(field, f, sub, target, dim) -> bool:
    return all(la.in_span(field, target, la.mat_vec(field, f, v), dim) for v in sub)


def morphism_check(phi: PAMap, psi: PAMap, f) -> MorphismResult:
    """Is ``F`` a morphism from ``phi`` to ``psi``, i.e. ``phi(x) <= F^* psi(x)`` everywhere?"""
    field = phi.field
    f = la.coerce_matrix(field, f)
    if la.shape(f) != (psi.rank, phi.rank):
        raise DimensionMismatch(f"F has shape {la.shape(f)}, expected {(psi.rank, phi.rank)}")
    _same_support(phi, psi)
    for v in phi.vertices():
        cells = phi.cells_at(v)
        if not cells:
            continue
        nv = piece_norm(field, phi.pieces[cells[0].id], v)
        nw = piece_norm(field, psi.pieces[cells[0].id], v)
        d = vertex_multiplicity(v)
        for k in range(d):
            s = Fraction(k, d)
            target = ball(nw, s)
            for col in ball(nv, s).columns():
                if not lattice_contains_vector(target, la.mat_vec(field, f, col)):
                    u = _character_for(v, s)
                    return MorphismResult(False, {"vertex": _fmt_point(v), "u": list(u), "threshold": str(s)})
    for c in phi.piece_cells():
        for w in c.rays:
            p = piece_prevaluation(field, phi.pieces[c.id], w)
            q = piece_prevaluation(field, psi.pieces[c.id], w)
            for j in _flag_breakpoints(p, q):
                if not _subspace_image_inside(field, f, p.filtration(j), q.filtration(j), psi.rank):
                    return MorphismResult(False, {"cell": c.id, "ray": list(w), "j": str(j)})
    return MorphismResult(True)


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    frame: la.Matrix

    verdict = "split"

    def to_json(self, field: FieldSpec) -> dict:
        return {"verdict": "split", "frame": [[field.format(x) for x in col] for col in la.columns(self.frame)]}


@dataclass(frozen=True)
class NotSplit:
    certificate: object

    verdict = "not_split"

    def to_json(self, field: FieldSpec) -> dict:
        cert = self.certificate
        return {"verdict": "not_split", "certificate": cert.to_json() if hasattr(cert, "to_json") else cert}


@dataclass(frozen=True)
class Unknown:
    note: str

    verdict = "unknown"

    def to_json(self, field: FieldSpec) -> dict:
        return {"verdict": "unknown", "note": self.note}


def budget_depth() -> int:
    raw = os.environ.get("BTT_BUDGET_DEPTH")
    if raw is None:
        return DEFAULT_BUDGET_DEPTH
    try:
        return max(0, int(raw))
    except ValueError:
        return DEFAULT_BUDGET_DEPTH


def _vertex_norms(phi: PAMap) -> list:
    out = []
    for c in phi.piece_cells():
        piece = phi.pieces[c.id]
        for v in c.vertices:
            out.append(piece_norm(phi.field, piece, v))
    return out


def _ray_prevaluations(phi: PAMap) -> list:
    out = []
    for c in phi.piece_cells():
        piece = phi.pieces[c.id]
        for w in c.rays:
            out.append((c, w, piece_prevaluation(phi.field, piece, w)))
    return out


def _flag_adapted(field, pv: Prevaluation, frame, rank) -> bool:
    cols = la.columns(frame)
    for j in pv.breakpoints():
        sub = pv.filtration(j)
        inside = [c for c in cols if la.in_span(field, sub, c, rank)]
        if len(inside) != len(sub):
            return False
    return True


def frame_splits(phi: PAMap, frame) -> bool:
    """Re-verification of a splitting frame against every vertex norm and ray flag."""
    field = phi.field
    frame = la.coerce_matrix(field, frame)
    if la.rank(field, frame) < phi.rank:
        return False
    if not all(is_adapted(n, frame) for n in _vertex_norms(phi)):
        return False
    return all(_flag_adapted(field, pv, frame, phi.rank) for _, _, pv in _ray_prevaluations(phi))


def _ball_classes(norm: AdaptedNorm) -> list:
    return [tree.normalize(ball(norm, t)) for t in thresholds(norm)]


def _ends(phi: PAMap) -> list:
    ends = []
    for _, _, pv in _ray_prevaluations(phi):
        top = max(pv.values)
        if top == min(pv.values):
            continue
        ends.append(tree.End.from_prevaluation(pv))
    return ends


def _split_rank2(phi: PAMap):
    points = []
    for n in _vertex_norms(phi):
        points.extend(_ball_classes(n))
    res = tree.common_line(points, _ends(phi))
    if res:
        if not frame_splits(phi, res):
            raise AssertionError("tree frame failed re-verification")
        return Split(res)
    if isinstance(res.certificate, tree.Tripod):
        return NotSplit(res.certificate)
    # the obstruction comes from an end: walk out along the rays until a tripod shows up
    t = 1
    while t <= RAY_CAP:
        extra = list(points)
        for c in phi.piece_cells():
            piece = phi.pieces[c.id]
            for v in c.vertices:
                for w in c.rays:
                    x = tuple(a + t * b for a, b in zip(v, w))
                    extra.extend(_ball_classes(piece_norm(phi.field, piece, x)))
        res_t = tree.common_line(extra, ())
        if not res_t and isinstance(res_t.certificate, tree.Tripod):
            return NotSplit(res_t.certificate)
        t *= 2
    return NotSplit(res.certificate)


def _volume(lat: Lattice) -> int:
    return sum(lat.exponents())


def _distributivity_witness(field, lattices, heads=None, budget=None):
    """``(a, b, c)`` with ``a & (b + c) != (a & b) + (a & c)``, found by comparing volumes.

    ``a`` runs over the indices ``heads`` (default: all) and at most ``budget``
    triples are tried; the second return value tells whether the budget ran out.

    The right side always sits inside the left, and ``vol(a & x) = vol a + vol x - vol(a + x)``,
    so only sums are formed per triple; pairwise sums and intersections are cached.
    """
    n = len(lattices)
    heads = range(n) if heads is None else heads
    tried = 0
    vol = [_volume(m) for m in lattices]
    sums, meets, triple = {}, {}, {}

    def s(i, j):
        key = (min(i, j), max(i, j))
        if key not in sums:
            sums[key] = lattice_sum(lattices[i], lattices[j])
        return sums[key]

    def m(i, j):
        key = (min(i, j), max(i, j))
        if key not in meets:
            meets[key] = lattice_intersect(lattices[i], lattices[j])
        return meets[key]

    def t(i, j, k):
        key = tuple(sorted((i, j, k)))
        if key not in triple:
            triple[key] = _volume(lattice_sum(lattices[i], s(j, k)))
        return triple[key]

    for a in heads:
        for b, c in combinations(range(n), 2):
            if a in (b, c):
                continue
            if budget is not None and tried >= budget:
                return None, True
            tried += 1
            left = vol[a] + _volume(s(b, c)) - t(a, b, c)
            right = _volume(lattice_sum(m(a, b), m(a, c)))
            if left != right:
                return (lattices[a], lattices[b], lattices[c]), False
    return None, False


def _subspace_distributivity_witness(field, subspaces, dim):
    for a, b, c in product(subspaces, repeat=3):
        if a == b or a == c or b == c:
            continue
        left = la.subspace_intersect(field, a, la.subspace_sum(field, b, c, dim), dim)
        right = la.subspace_sum(
            field, la.subspace_intersect(field, a, b, dim), la.subspace_intersect(field, a, c, dim), dim
        )
        if left != right:
            return (a, b, c)
    return None


@dataclass(frozen=True)
class DistributivityWitness:
    kind: str
    field: FieldSpec
    members: tuple

    def to_json(self) -> dict:
        mats = [m.matrix if isinstance(m, Lattice) else m for m in self.members]
        return {
            "distributivity_failure": self.kind,
            "members": [[[self.field.format(x) for x in row] for row in m] for m in mats],
        }


def verify_distributivity_witness(w: DistributivityWitness, dim: int) -> bool:
    a, b, c = w.members
    if w.kind == "lattice":
        left = lattice_intersect(a, lattice_sum(b, c))
        right = lattice_sum(lattice_intersect(a, b), lattice_intersect(a, c))
        return not lattice_equal(left, right)
    f = w.field
    left = la.subspace_intersect(f, a, la.subspace_sum(f, b, c, dim), dim)
    right = la.subspace_sum(f, la.subspace_intersect(f, a, b, dim), la.subspace_intersect(f, a, c, dim), dim)
    return left != right


def _full_flag(pv: Prevaluation):
    """Subspaces of dimension 1..r-1 when the flag of ``pv`` is full, else ``None``."""
    subs = [sub for _, sub in pv.flag()]
    if len(subs) != pv.rank:
        return None
    return subs[:-1]


def _opposite_frame(field, f, g, r):
    """The unique frame adapted to two opposite full flags, or ``None`` if they are not opposite."""
    for i in range(1, r):
        if la.subspace_intersect(field, f[i - 1], g[r - i - 1], r):
            return None
    whole = la.identity(field, r)
    fs = list(f) + [whole]
    gs = list(g) + [whole]
    lines = []
    for i in range(1, r + 1):
        line = la.subspace_intersect(field, fs[i - 1], gs[r - i], r)
        if len(line) != 1:
            return None
        lines.append(line[0])
    return la.from_columns(lines)


@dataclass(frozen=True)
class OppositeFlags:
    """Two rays whose opposite full flags force a frame that fails at some vertex."""

    field: FieldSpec
    rays: tuple  # ((cell, ray), (cell, ray))
    frame: la.Matrix

    def to_json(self) -> dict:
        return {
            "opposite_flags": [{"cell": c, "ray": list(w)} for c, w in self.rays],
            "forced_frame": [[self.field.format(x) for x in col] for col in la.columns(self.frame)],
        }


def verify_opposite_flags(phi: PAMap, cert: OppositeFlags) -> bool:
    """Recompute both flags and the forced frame; the certificate holds if that frame does not split ``phi``."""
    (c1, w1), (c2, w2) = cert.rays
    p = piece_prevaluation(phi.field, phi.piece(c1), w1)
    q = piece_prevaluation(phi.field, phi.piece(c2), w2)
    f, g = _full_flag(p), _full_flag(q)
    if f is None or g is None:
        return False
    frame = _opposite_frame(phi.field, f, g, phi.rank)
    if frame is None:
        return False
    return not frame_splits(phi, frame)


def _forced_frame(phi: PAMap):
    """``(frame, rays)`` from the first pair of ray flags that are full and opposite."""
    full = []
    for c, w, pv in _ray_prevaluations(phi):
        f = _full_flag(pv)
        if f is not None:
            full.append(((c.id, w), f))
    for (k1, f), (k2, g) in combinations(full, 2):
        frame = _opposite_frame(phi.field, f, g, phi.rank)
        if frame is not None:
            return frame, (k1, k2)
    return None


def _candidate_frames(phi: PAMap, depth: int):
    """Piece bases, pairwise common bases, then refinements; each frame yielded once."""
    field = phi.field
    norms = _vertex_norms(phi)
    seen = []

    def fresh(g):
        if g in seen:
            return False
        seen.append(g)
        return True

    layer = []
    for p in phi.pieces.values():
        if fresh(p.basis):
            layer.append(p.basis)
            yield p.basis
    for a, b in combinations(norms, 2):
        g = common_adapted_basis(a, b)
        if fresh(g):
            layer.append(g)
            yield g
    r = phi.rank
    generic = tuple(Fraction(i, r + 1) for i in range(r))
    for _ in range(depth):
        nxt = []
        for g in layer:
            for n in norms:
                h = common_adapted_basis(AdaptedNorm(field, g, generic), n)
                if fresh(h):
                    nxt.append(h)
                    yield h
        layer = nxt


def _split_general(phi: PAMap, depth: int):
    field = phi.field
    # any splitting frame is adapted to every ray flag, and two opposite full flags admit only one
    forced = _forced_frame(phi)
    if forced is not None:
        frame, rays = forced
        if frame_splits(phi, frame):
            return Split(frame)
        return NotSplit(OppositeFlags(field, rays, frame))
    for g in _candidate_frames(phi, depth):
        if frame_splits(phi, g):
            return Split(g)
    # balls of the vertex norms first, then of points far out on the rays;
    # the first member of a triple is never shifted since a common homothety changes nothing
    stages = [_vertex_norms(phi), []]
    for c in phi.piece_cells():
        piece = phi.pieces[c.id]
        for v in c.vertices:
            for w in c.rays:
                for t in (1, 2):
                    stages[1].append(piece_norm(field, piece, tuple(a + t * b for a, b in zip(v, w))))
    budget = TRIPLE_BUDGET * (depth + 1)
    lattices, heads = [], []

    def add(lat, head):
        if all(not lattice_equal(lat, m) for m in lattices):
            lattices.append(lat)
            if head:
                heads.append(len(lattices) - 1)

    exhausted = False
    for norms in stages:
        for n in norms:
            for t in thresholds(n):
                add(ball(n, t), True)
                add(ball(n, t - 1), False)
                add(ball(n, t + 1), False)
        wit, exhausted = _distributivity_witness(field, lattices, heads, budget)
        if wit is not None:
            return NotSplit(DistributivityWitness("lattice", field, wit))
        if exhausted:
            break
    subspaces = []
    for _, _, pv in _ray_prevaluations(phi):
        for _, sub in pv.flag():
            if sub and sub not in subspaces:
                subspaces.append(sub)
    wit = _subspace_distributivity_witness(field, subspaces, phi.rank)
    if wit is not None:
        return NotSplit(DistributivityWitness("subspace", field, wit))
    note = f"no frame or obstruction found at refinement depth {depth}"
    if exhausted:
        note += f" (obstruction search stopped after {budget} triples)"
    return Unknown(note)


def splitting_check(phi: PAMap, depth: int | None = None):
    if phi.rank == 1:
        return Split(la.identity(phi.field, 1))
    if phi.rank == 2:
        return _split_rank2(phi)
    return _split_general(phi, budget_depth() if depth is None else depth)
