"""Rational polyhedral complexes in ``N_Q x {1}`` given by V-representations.

Face relations are declared by the input and verified here with an exact
rational feasibility test; nothing is discovered by convex-hull computation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .errors import CellNotFound, DimensionMismatch

__all__ = [
    "Polyhedron",
    "Complex",
    "Report",
    "feasible",
    "recession",
    "recession_fan",
    "vertex_multiplicity",
    "validate_complex",
    "pairing",
    "pairing_ray",
]


# ---------------------------------------------------------------------------
# exact feasibility
# ---------------------------------------------------------------------------

def feasible(a, b) -> bool:
    """Is ``{y >= 0 : a y = b}`` nonempty?  Phase-one simplex with Bland's rule."""
    m = len(a)
    if m == 0:
        return True
    n = len(a[0])
    rows = []
    for row, rhs in zip(a, b):
        row = [Fraction(x) for x in row]
        rhs = Fraction(rhs)
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        rows.append(row + [Fraction(int(i == len(rows))) for i in range(m)] + [rhs])
    basis = [n + i for i in range(m)]
    width = n + m
    # objective: minimize the sum of artificials, expressed in reduced costs
    cost = [Fraction(0)] * (width + 1)
    for row in rows:
        for j in range(width + 1):
            if j < n or j == width:
                cost[j] -= row[j]
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[width] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            break
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        for i, row in enumerate(rows):
            if i != leave and row[enter] != 0:
                f = row[enter]
                rows[i] = [x - f * y for x, y in zip(row, rows[leave])]
        f = cost[enter]
        cost = [x - f * y for x, y in zip(cost, rows[leave])]
        basis[leave] = enter
    return cost[width] == 0


# ---------------------------------------------------------------------------
# polyhedra
# ---------------------------------------------------------------------------

def _primitive_int(w):
    w = tuple(int(x) for x in w)
    g = 0
    for x in w:
        g = math.gcd(g, x)
    return g, w


@lru_cache(maxsize=1 << 16)
def _contains(cell: "Polyhedron", x: tuple) -> bool:
    a, rhs = cell._system(x)
    return feasible(a, rhs)


@dataclass(frozen=True)
class Polyhedron:
    id: object
    vertices: tuple
    rays: tuple = ()

    def __post_init__(self):
        verts = tuple(tuple(Fraction(x) for x in v) for v in self.vertices)
        if not verts:
            raise DimensionMismatch(f"cell {self.id!r} has no vertices")
        n = len(verts[0])
        rays = tuple(tuple(int(x) for x in w) for w in self.rays)
        if any(len(v) != n for v in verts) or any(len(w) != n for w in rays):
            raise DimensionMismatch(f"cell {self.id!r} mixes dimensions")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "rays", rays)

    @property
    def dim_ambient(self) -> int:
        return len(self.vertices[0])

    def _system(self, x, with_vertices=True):
        n = self.dim_ambient
        gens = list(self.vertices) if with_vertices else []
        cols = [list(v) + [1] for v in gens] + [list(w) + [0] for w in self.rays]
        a = [[c[i] for c in cols] for i in range(n + (1 if with_vertices else 0))]
        rhs = list(x) + ([1] if with_vertices else [])
        return a, rhs

    def contains(self, x) -> bool:
        x = tuple(Fraction(c) for c in x)
        if len(x) != self.dim_ambient:
            raise DimensionMismatch(f"point of dimension {len(x)} in cell of dimension {self.dim_ambient}")
        return _contains(self, x)

    def contains_direction(self, w) -> bool:
        """``w`` lies in the recession cone."""
        w = tuple(Fraction(c) for c in w)
        if all(c == 0 for c in w):
            return True
        if not self.rays:
            return False
        a, rhs = self._system(w, with_vertices=False)
        return feasible(a, rhs)

    def contains_polyhedron(self, other: "Polyhedron") -> bool:
        return all(self.contains(v) for v in other.vertices) and all(
            self.contains_direction(w) for w in other.rays
        )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "vertices": [[str(c) for c in v] for v in self.vertices],
            "rays": [list(w) for w in self.rays],
        }


def intersects(p: Polyhedron, q: Polyhedron) -> bool:
    """Exact test for a common point."""
    n = p.dim_ambient
    cols = []
    for v in p.vertices:
        cols.append(list(v) + [1, 0])
    for w in p.rays:
        cols.append(list(w) + [0, 0])
    for v in q.vertices:
        cols.append([-c for c in v] + [0, 1])
    for w in q.rays:
        cols.append([-c for c in w] + [0, 0])
    a = [[c[i] for c in cols] for i in range(n + 2)]
    return feasible(a, [0] * n + [1, 1])


def recession(cell: Polyhedron) -> list:
    return list(cell.rays)


def vertex_multiplicity(v) -> int:
    out = 1
    for c in v:
        d = Fraction(c).denominator
        out = out * d // math.gcd(out, d)
    return out


def pairing(u, x) -> Fraction:
    if len(u) != len(x) + 1:
        raise DimensionMismatch(f"character of length {len(u)} against point of dimension {len(x)}")
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, x)), Fraction(0)) + Fraction(u[-1])


def pairing_ray(u, w) -> Fraction:
    if len(u) != len(w) + 1:
        raise DimensionMismatch(f"character of length {len(u)} against ray of dimension {len(w)}")
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, w)), Fraction(0))


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Face:
    cells: tuple
    face: Polyhedron


@dataclass
class Report:
    violations: list = dc_field(default_factory=list)
    warnings: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, **info):
        self.violations.append({"kind": kind, **info})

    def warn(self, kind: str, **info):
        self.warnings.append({"kind": kind, **info})

    def extend(self, other: "Report"):
        self.violations.extend(other.violations)
        self.warnings.extend(other.warnings)

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations, "warnings": self.warnings}


class Complex:
    def __init__(self, cells, faces=()):
        self.cells = list(cells)
        self.faces = [f if isinstance(f, Face) else Face(tuple(f[0]), f[1]) for f in faces]
        self._by_id = {}
        for c in self.cells:
            self._by_id.setdefault(c.id, c)
        dims = {c.dim_ambient for c in self.cells}
        if len(dims) > 1:
            raise DimensionMismatch(f"cells of dimensions {sorted(dims)}")
        self.dim = dims.pop() if dims else 0

    def cell(self, cid) -> Polyhedron:
        try:
            return self._by_id[cid]
        except KeyError:
            raise CellNotFound(f"no cell {cid!r}") from None

    def ids(self) -> list:
        return [c.id for c in self.cells]

    def maximal_cells(self) -> list:
        out = []
        for c in self.cells:
            if not any(d is not c and d.contains_polyhedron(c) and not c.contains_polyhedron(d) for d in self.cells):
                out.append(c)
        return out

    def cells_containing(self, x) -> list:
        return [c for c in self.cells if c.contains(x)]

    def vertices(self) -> list:
        seen = []
        for c in self.cells:
            for v in c.vertices:
                if v not in seen:
                    seen.append(v)
        return seen

    def to_json(self) -> dict:
        return {
            "cells": [c.to_json() for c in self.cells],
            "faces": [{"cells": list(f.cells), "face": f.face.to_json()} for f in self.faces],
        }


def recession_fan(cx: Complex) -> list:
    """``[(cell id, rays)]`` for every cell; :func:`all_rays` deduplicates."""
    return [(c.id, list(c.rays)) for c in cx.cells]


def all_rays(cx: Complex) -> list:
    out = []
    for c in cx.cells:
        for w in c.rays:
            if w not in out:
                out.append(w)
    return out


def validate_complex(cx: Complex) -> Report:
    rep = Report()
    seen = set()
    for c in cx.cells:
        if c.id in seen:
            rep.add("duplicate_cell_id", cell=c.id)
        seen.add(c.id)
    for c in cx.cells:
        for i, v in enumerate(c.vertices):
            rest = Polyhedron(c.id, c.vertices[:i] + c.vertices[i + 1:], c.rays) if len(c.vertices) > 1 else None
            if rest is not None and rest.contains(v):
                rep.add("redundant_vertex", cell=c.id, vertex=[str(x) for x in v])
        for i, w in enumerate(c.rays):
            g, _ = _primitive_int(w)
            if g != 1:
                rep.add("ray_not_primitive", cell=c.id, ray=list(w))
                continue
            if w in c.rays[:i]:
                rep.add("duplicate_ray", cell=c.id, ray=list(w))
                continue
            others = Polyhedron(c.id, c.vertices, c.rays[:i] + c.rays[i + 1:])
            if others.contains_direction(w):
                rep.add("redundant_ray", cell=c.id, ray=list(w))
    declared = set()
    for f in cx.faces:
        for cid in f.cells:
            if cid not in cx._by_id:
                rep.add("unknown_cell", cell=cid)
                continue
            if not cx.cell(cid).contains_polyhedron(f.face):
                rep.add("face_not_contained", cell=cid, face=f.face.to_json())
        if len(f.cells) == 2:
            declared.add(frozenset(f.cells))
    for c, d in combinations(cx.cells, 2):
        if c.id == d.id or frozenset((c.id, d.id)) in declared:
            continue
        if c.contains_polyhedron(d) or d.contains_polyhedron(c):
            continue
        if intersects(c, d):
            rep.add("undeclared_intersection", cells=[c.id, d.id])
    return rep
