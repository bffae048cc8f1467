"""The Bruhat-Tits tree of GL(2).

Vertices are homothety classes of rank-2 lattices, stored as the canonical
form scaled so that the first pivot is 1.  Ends are lines in ``E``.
Geodesics are built algebraically from invariant factors; breadth-first
search only appears in :func:`ball` (for enumeration and DOT export).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field as dc_field
from itertools import combinations

from . import linalg as la
from .errors import DimensionMismatch, RadiusTooLarge, RankDeficient
from .latnorm import (
    AdaptedNorm,
    Lattice,
    Prevaluation,
    common_adapted_basis,
    hnf,
    invariant_factors,
    is_adapted,
    lattice_scale,
    norm_from_lattice,
)
from .valfield import FieldSpec

DEFAULT_RADIUS_CAP = 6


@dataclass(frozen=True)
class VertexClass:
    lattice: Lattice = dc_field(compare=False)
    key: tuple = dc_field(repr=False)

    @property
    def field(self) -> FieldSpec:
        return self.lattice.field

    @property
    def exponent(self) -> int:
        return self.lattice.exponents()[1]

    @property
    def offdiag(self):
        return self.lattice.matrix[1][0]

    def label(self) -> str:
        return f"{self.exponent}:{self.field.format(self.offdiag)}"

    def sort_key(self):
        return (self.exponent, self.field.format(self.offdiag))

    def norm(self) -> AdaptedNorm:
        return norm_from_lattice(self.lattice)

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "offdiag": self.field.format(self.offdiag),
            "lattice": [[self.field.format(x) for x in row] for row in self.lattice.matrix],
        }

    def __repr__(self):
        return f"VertexClass({self.label()})"


def normalize(lat: Lattice) -> VertexClass:
    if lat.rank != 2:
        raise RankDeficient(f"tree vertices need rank 2, got rank {lat.rank}")
    a = lat.exponents()[0]
    if a != 0:
        lat = lattice_scale(lat, lat.field.uniformizer_pow(-a))
    return VertexClass(lat, lat.matrix)


def vertex_from_columns(field: FieldSpec, cols) -> VertexClass:
    return normalize(hnf(field, la.from_columns([tuple(field.coerce(x) for x in c) for c in cols])))


def standard_vertex(field: FieldSpec) -> VertexClass:
    return vertex_from_columns(field, [(1, 0), (0, 1)])


def diagonal_vertex(field: FieldSpec, a: int, basis=None) -> VertexClass:
    """Class of ``O b1 + O pi^a b2`` for the columns of ``basis``."""
    if basis is None:
        basis = la.identity(field, 2)
    b1, b2 = la.columns(la.coerce_matrix(field, basis))
    s = field.uniformizer_pow(a)
    return vertex_from_columns(field, [b1, tuple(s * x for x in b2)])


# ---------------------------------------------------------------------------
# adjacency, distance, geodesics
# ---------------------------------------------------------------------------

def neighbors(v: VertexClass) -> list:
    field = v.field
    g1, g2 = v.lattice.columns()
    pi = field.uniformizer_pow(1)
    lifts = [tuple(x + field.coerce(k) * y for x, y in zip(g1, g2)) for k in field.residue_lifts()]
    lifts.append(g2)
    out = []
    for e in lifts:
        out.append(vertex_from_columns(field, [tuple(pi * x for x in g1), tuple(pi * x for x in g2), e]))
    return out


def adjacent(u: VertexClass, v: VertexClass) -> bool:
    return distance(u, v) == 1


def distance(u: VertexClass, v: VertexClass) -> int:
    exps = invariant_factors(u.lattice, v.lattice).exponents
    return exps[0] - exps[1]


def geodesic(u: VertexClass, v: VertexClass) -> list:
    """Vertices of the unique path from ``u`` to ``v``, both included."""
    if u.key == v.key:
        return [u]
    inv = invariant_factors(u.lattice, v.lattice)
    d = inv.exponents[0] - inv.exponents[1]
    g1, g2 = la.columns(inv.basis)
    field = u.field
    path = [u]
    for k in range(1, d + 1):
        s = field.uniformizer_pow(k)
        path.append(vertex_from_columns(field, [tuple(s * x for x in g1), g2]))
    if path[-1].key != v.key:
        raise AssertionError("geodesic does not reach its endpoint")
    return path


def ball(center: VertexClass, radius: int) -> tuple:
    """Breadth-first enumeration: ``(vertices, edges)`` with edges as index pairs."""
    order = [center]
    index = {center.key: 0}
    edges = []
    frontier = deque([(center, 0)])
    while frontier:
        v, depth = frontier.popleft()
        if depth == radius:
            continue
        for w in sorted(neighbors(v), key=VertexClass.sort_key):
            if w.key in index:
                continue
            index[w.key] = len(order)
            order.append(w)
            edges.append((index[v.key], index[w.key]))
            frontier.append((w, depth + 1))
    return order, edges


def export_dot(center: VertexClass, radius: int, cap: int = DEFAULT_RADIUS_CAP) -> str:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > cap:
        raise RadiusTooLarge(f"radius {radius} exceeds cap {cap}")
    verts, edges = ball(center, radius)
    lines = ["graph tree {"]
    for i, v in enumerate(verts):
        lines.append(f'  n{i} [label="{v.label()}"];')
    for i, j in edges:
        lines.append(f"  n{i} -- n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# ends
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class End:
    """A point at infinity of the tree, given by a line of ``E``."""

    field: FieldSpec
    line: tuple

    def __post_init__(self):
        line = tuple(self.field.coerce(x) for x in self.line)
        if len(line) != 2:
            raise DimensionMismatch("ends live in a rank-2 space")
        pivot = next((x for x in line if x != 0), None)
        if pivot is None:
            raise RankDeficient("the zero vector spans no line")
        object.__setattr__(self, "line", tuple(x / pivot for x in line))

    @classmethod
    def from_prevaluation(cls, pv: Prevaluation) -> "End":
        top = max(pv.values)
        sub = pv.filtration(top)
        if len(sub) != 1:
            raise RankDeficient("prevaluation flag has no proper line")
        return cls(pv.field, sub[0])

    def prevaluation(self) -> Prevaluation:
        other = (0, 1) if self.line[0] != 0 else (1, 0)
        return Prevaluation(self.field, la.from_columns([self.line, other]), (1, 0))

    def to_json(self) -> list:
        return [self.field.format(x) for x in self.line]


def _primitive(lat: Lattice, vec) -> tuple:
    """``(pi^-m vec, coordinates)`` with coordinates in the lattice basis of minimal valuation 0."""
    field = lat.field
    coords = la.solve(field, lat.matrix, vec)
    m = min(field.val(c) for c in coords if c != 0)
    s = field.uniformizer_pow(-m)
    return tuple(s * x for x in vec), tuple(s * c for c in coords)


def ray_vertex(v: VertexClass, end: End, k: int) -> VertexClass:
    """The vertex at distance ``k`` from ``v`` on the ray toward ``end``."""
    field = v.field
    prim, _ = _primitive(v.lattice, end.line)
    s = field.uniformizer_pow(-k)
    g1, g2 = v.lattice.columns()
    return vertex_from_columns(field, [g1, g2, tuple(s * x for x in prim)])


def _frame_through(v: VertexClass, end: End):
    """A basis of ``v``'s lattice containing a multiple of ``end.line``."""
    prim, coords = _primitive(v.lattice, end.line)
    g1, g2 = v.lattice.columns()
    other = g2 if v.field.val(coords[0]) == 0 else g1
    return la.from_columns([prim, other])


# ---------------------------------------------------------------------------
# common apartments and Helly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tripod:
    center: VertexClass
    legs: tuple

    def to_json(self) -> dict:
        return {
            "tripod_vertex": self.center.to_json(),
            "legs": [leg.to_json() for leg in self.legs],
        }


@dataclass(frozen=True)
class EndConflict:
    ends: tuple
    vertices: tuple
    reason: str

    def to_json(self) -> dict:
        return {
            "reason": self.reason,
            "ends": [e.to_json() for e in self.ends],
            "vertices": [v.to_json() for v in self.vertices],
        }


@dataclass(frozen=True)
class NoCommonLine:
    certificate: object

    def __bool__(self):
        return False


def verify_tripod(t: Tripod) -> bool:
    """Checks the certificate from distances alone."""
    q = t.center
    legs = t.legs
    if len(legs) != 3 or any(leg.key == q.key for leg in legs):
        return False
    for x, y in combinations(legs, 2):
        if distance(x, y) != distance(x, q) + distance(q, y):
            return False
    return True


def _spanning_tree(points):
    root = points[0]
    adj = {root.key: set()}
    verts = {root.key: root}
    for s in points[1:]:
        path = geodesic(root, s)
        for a, b in zip(path, path[1:]):
            verts.setdefault(b.key, b)
            adj.setdefault(a.key, set()).add(b.key)
            adj.setdefault(b.key, set()).add(a.key)
    return verts, adj


def _tripod_at(q: VertexClass, points) -> Tripod:
    legs = {}
    for s in points:
        if s.key == q.key:
            continue
        first = geodesic(q, s)[1].key
        legs.setdefault(first, s)
    chosen = sorted(legs.values(), key=VertexClass.sort_key)[:3]
    return Tripod(q, tuple(chosen))


def _dedupe(vertices):
    seen = {}
    for v in vertices:
        seen.setdefault(v.key, v)
    return list(seen.values())


def _distinct_ends(ends):
    out = []
    for e in ends:
        if all(e.line != f.line for f in out):
            out.append(e)
    return out


def _verified(frame, points):
    return all(is_adapted(p.norm(), frame) for p in points)


def common_line(S, ends=()):
    """A frame whose apartment holds every vertex of ``S`` and every end, or :class:`NoCommonLine`."""
    points = _dedupe(S)
    if not points:
        raise ValueError("common_line needs at least one vertex")
    ends = _distinct_ends(ends)
    verts, adj = _spanning_tree(points)
    for key in sorted(adj, key=lambda k: verts[k].sort_key()):
        if len(adj[key]) >= 3:
            return NoCommonLine(_tripod_at(verts[key], points))
    root = points[0]
    a = max(points, key=lambda s: (distance(root, s), s.sort_key()))
    z = max(points, key=lambda s: (distance(a, s), s.sort_key()))
    if len(ends) >= 3:
        return NoCommonLine(EndConflict(tuple(ends[:3]), (), "three distinct ends"))
    if len(ends) == 2:
        frame = la.from_columns([ends[0].line, ends[1].line])
        for p in points:
            if not is_adapted(p.norm(), frame):
                return NoCommonLine(EndConflict(tuple(ends), (p,), "vertex off the line joining the ends"))
        return frame
    if len(ends) == 1:
        end = ends[0]
        d = distance(a, z)
        for near, far in ((a, z), (z, a)):
            if ray_vertex(far, end, d).key == near.key:
                frame = _frame_through(far, end)
                if not _verified(frame, points):
                    raise AssertionError("frame through an end failed verification")
                return frame
        return NoCommonLine(EndConflict((end,), (a, z), "end not aligned with the path"))
    if a.key == z.key:
        return la.coerce_matrix(a.field, a.lattice.matrix)
    frame = common_adapted_basis(a.norm(), z.norm())
    if not _verified(frame, points):
        raise AssertionError("common adapted basis failed verification")
    return frame


def collinear(x: VertexClass, y: VertexClass, z: VertexClass) -> bool:
    dxy, dyz, dxz = distance(x, y), distance(y, z), distance(x, z)
    return dxy + dyz == dxz or dxy + dxz == dyz or dxz + dyz == dxy


def helly_triples(S) -> bool:
    """Every three vertices of ``S`` lie on one path."""
    points = _dedupe(S)
    n = len(points)
    dist = {}
    for i, j in combinations(range(n), 2):
        dist[i, j] = dist[j, i] = distance(points[i], points[j])
    for i, j, k in combinations(range(n), 3):
        a, b, c = dist[i, j], dist[j, k], dist[i, k]
        if not (a + b == c or a + c == b or b + c == a):
            return False
    return True
