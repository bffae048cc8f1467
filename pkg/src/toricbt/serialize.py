"""JSON encoding of maps, norms, lattices and linear maps.

Every document is checked against the schemas shipped in ``docs/`` before
it is interpreted.  All numbers in outputs are exact strings.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import jsonschema

from . import linalg as la
from .errors import ParseError, ToricBTError
from .latnorm import AdaptedNorm, Lattice
from .pamap import PAMap, PAPiece
from .polyhedral import Complex, Face, Polyhedron
from .valfield import FieldSpec, field_from_json, parse_fraction


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("toricbt").joinpath("docs", f"{name}.schema.json").read_text()
    return json.loads(text)


def check(doc, name: str):
    try:
        jsonschema.validate(doc, schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ParseError(f"{name}: {exc.message} at /{path}") from None


def read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def parse_scalar(field: FieldSpec, x):
    if isinstance(x, int):
        return field.coerce(x)
    return field.parse(x)


def parse_matrix(field: FieldSpec, rows) -> la.Matrix:
    return tuple(tuple(parse_scalar(field, x) for x in row) for row in rows)


def format_matrix(field: FieldSpec, m) -> list:
    return [[field.format(x) for x in row] for row in m]


def parse_point(text_or_list) -> tuple:
    if isinstance(text_or_list, str):
        parts = [p for p in text_or_list.split(",") if p.strip()]
    else:
        parts = list(text_or_list)
    if not parts:
        raise ParseError("empty point")
    return tuple(parse_fraction(p) if isinstance(p, str) else Fraction(p) for p in parts)


def _polyhedron(obj, default_id=None) -> Polyhedron:
    verts = [tuple(parse_fraction(str(c)) for c in v) for v in obj["vertices"]]
    return Polyhedron(obj.get("id", default_id), verts, obj.get("rays", []))


def load_map(doc) -> PAMap:
    check(doc, "pamap")
    try:
        field = field_from_json(doc["field"])
        cells = [_polyhedron(c) for c in doc["complex"]["cells"]]
        faces = [
            Face(tuple(f["cells"]), _polyhedron(f["face"], default_id="face"))
            for f in doc["complex"].get("faces", [])
        ]
        cx = Complex(cells, faces)
        pieces = [PAPiece(p["cell"], parse_matrix(field, p["basis"]), p["chars"]) for p in doc["pieces"]]
        return PAMap(field, cx, doc["rank"], pieces)
    except ToricBTError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"invalid map: {exc}") from exc


def dump_map(phi: PAMap) -> dict:
    return {
        "field": phi.field.to_json(),
        "complex": phi.complex.to_json(),
        "rank": phi.rank,
        "pieces": [
            {"cell": p.cell, "basis": format_matrix(phi.field, p.basis), "chars": [list(u) for u in p.chars]}
            for p in phi.pieces.values()
        ],
    }


def load_linear_map(doc, field: FieldSpec) -> la.Matrix:
    check(doc, "linear_map")
    m = parse_matrix(field, doc["matrix"])
    if len({len(row) for row in m}) != 1:
        raise ParseError("ragged matrix")
    return m


def load_vertex_list(doc, field: FieldSpec) -> list:
    check(doc, "vertices")
    from .tree import vertex_from_columns

    try:
        return [vertex_from_columns(field, [[parse_scalar(field, x) for x in col] for col in cols]) for cols in doc]
    except ToricBTError as exc:
        raise ParseError(f"invalid vertex: {exc}") from exc


def norm_to_json(field: FieldSpec, v: AdaptedNorm) -> dict:
    return {"basis": format_matrix(field, v.basis), "values": [str(c) for c in v.values]}


def lattice_to_json(field: FieldSpec, lat: Lattice) -> dict:
    return {"hnf": format_matrix(field, lat.matrix), "exponents": list(lat.exponents())}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
