"""Command-line front end.

Exit codes: 0 success, 1 unreadable or schema-invalid input, 2 semantic
failure (gluing violations, point outside a cell, ...), 3 splitting verdict
``unknown`` because the search budget ran out.
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from . import linalg as la
from . import pamap as pm
from . import tree
from .errors import ParseError, ToricBTError
from .sampling import sampled_violation
from .serialize import (
    dumps,
    lattice_to_json,
    load_linear_map,
    load_map,
    load_vertex_list,
    norm_to_json,
    parse_point,
    read_json,
)
from .valfield import PAdicField

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_UNKNOWN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def _load(args):
    doc = read_json(args.input)
    if getattr(args, "field", None):
        try:
            override = json.loads(args.field)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--field: {exc.msg}") from None
        doc = dict(doc, field=override)
    return load_map(doc)


def _cell_arg(value):
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return value


def _resolve_cell(phi, value):
    if value is None:
        return None
    if value in phi.complex.ids():
        return value
    as_int = _cell_arg(value)
    return as_int if as_int in phi.complex.ids() else value


def _render(obj, fmt):
    if fmt == "text":
        lines = []
        for key, val in obj.items():
            lines.append(f"{key}: {json.dumps(val)}")
        return "\n".join(lines) + "\n"
    return dumps(obj)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args):
    phi = _load(args)
    rep = pm.validate_gluing(phi)
    return rep.to_json(), (EXIT_OK if rep.ok else EXIT_SEMANTIC)


def cmd_eval(args):
    phi = _load(args)
    x = parse_point(args.at)
    cell = _resolve_cell(phi, args.cell)
    norm = pm.eval_at(phi, x) if cell is None else pm.eval_map(phi, cell, x)
    out = {"point": [str(c) for c in x]}
    out.update(norm_to_json(phi.field, norm))
    return out, EXIT_OK


def cmd_lattice(args):
    phi = _load(args)
    v = parse_point(args.vertex)
    try:
        u = [int(a) for a in args.char.split(",")]
    except ValueError:
        raise ParseError(f"--char: expected comma separated integers, got {args.char!r}") from None
    cell = _resolve_cell(phi, args.cell)
    lat = pm.vertex_lattice(phi, v, u, cell)
    out = {"vertex": [str(c) for c in v], "char": u}
    out.update(lattice_to_json(phi.field, lat))
    out["consistent_across_cells"] = pm.vertex_lattice_consistent(phi, v, u)
    return out, EXIT_OK


def cmd_generic_fiber(args):
    phi = _load(args)
    lp = pm.linear_part(phi)
    out = {
        "klyachko": [e.to_json(phi.field) for e in lp.entries],
        "consistent_across_cells": lp.consistent,
    }
    if lp.inconsistent:
        out["inconsistent"] = lp.inconsistent
    return out, EXIT_OK


def cmd_split(args):
    phi = _load(args)
    verdict = pm.splitting_check(phi, args.depth)
    code = EXIT_UNKNOWN if isinstance(verdict, pm.Unknown) else EXIT_OK
    return verdict.to_json(phi.field), code


def cmd_hom(args):
    phi = _load(args)
    target_args = argparse.Namespace(input=args.target, field=args.field)
    psi = _load(target_args)
    if psi.field != phi.field:
        raise ParseError("source and target maps use different fields")
    f = load_linear_map(read_json(args.map), phi.field)
    res = pm.morphism_check(phi, psi, f)
    out = {"morphism": res.ok}
    if res.witness is not None:
        out["witness"] = res.witness
    if args.sample:
        rng = random.Random(args.seed)
        hit = sampled_violation(phi, psi, f, rng, args.sample, args.sample)
        out["sampled"] = {
            "points": args.sample,
            "vectors": args.sample,
            "seed": args.seed,
            "violation": None
            if hit is None
            else {"point": [str(c) for c in hit[0]], "vector": [phi.field.format(c) for c in hit[1]]},
        }
    return out, EXIT_OK


def _vertex_arg(field, text):
    if text is None:
        return tree.standard_vertex(field)
    try:
        cols = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"vertex {text!r}: {exc.msg}") from None
    return load_vertex_list([cols], field)[0]


def cmd_tree(args):
    field = PAdicField(args.p)
    if args.tree_cmd == "neighbors":
        v = _vertex_arg(field, args.center)
        return {"center": v.to_json(), "neighbors": [w.to_json() for w in tree.neighbors(v)]}, EXIT_OK
    if args.tree_cmd == "geodesic":
        a = _vertex_arg(field, args.source)
        b = _vertex_arg(field, args.target)
        path = tree.geodesic(a, b)
        return {"distance": len(path) - 1, "path": [v.to_json() for v in path]}, EXIT_OK
    if args.tree_cmd == "helly":
        if args.vertices.lstrip().startswith("["):
            try:
                doc = json.loads(args.vertices)
            except json.JSONDecodeError as exc:
                raise ParseError(f"--vertices: {exc.msg}") from None
        else:
            doc = read_json(args.vertices)
        verts = load_vertex_list(doc, field)
        res = tree.common_line(verts)
        out = {"helly_triples": tree.helly_triples(verts) if len(verts) >= 3 else True}
        if res:
            out["frame"] = [[field.format(x) for x in col] for col in la.columns(res)]
        else:
            out["frame"] = None
            out["certificate"] = res.certificate.to_json()
        return out, EXIT_OK
    if args.tree_cmd == "dot":
        v = _vertex_arg(field, args.center)
        return tree.export_dot(v, args.radius, args.cap), EXIT_OK
    raise ParseError(f"unknown tree command {args.tree_cmd!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toricbt", description="Piecewise affine maps to Bruhat-Tits buildings of GL(r).")
    parser.add_argument("--format", choices=["json", "text", "dot"], default=None, help="output format")
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=["json", "text", "dot"], default=argparse.SUPPRESS, help="output format")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_map(name, help_text):
        p = sub.add_parser(name, help=help_text, parents=[fmt])
        p.add_argument("input", help="map document (JSON)")
        p.add_argument("--field", help="override the field, e.g. '{\"backend\":\"padic\",\"p\":3}'")
        return p

    with_map("validate", "check the complex and the gluing conditions")
    p = with_map("eval", "evaluate the map at a point")
    p.add_argument("--at", required=True, help="comma separated rationals")
    p.add_argument("--cell", help="cell id (default: first cell containing the point)")
    p = with_map("lattice", "weight lattice at a vertex for a character")
    p.add_argument("--vertex", required=True)
    p.add_argument("--char", required=True, help="comma separated integers")
    p.add_argument("--cell")
    with_map("generic-fiber", "Klyachko filtrations of the generic fiber")
    p = with_map("split", "decide equivariant splitting")
    p.add_argument("--depth", type=int, default=None, help="refinement budget for rank >= 3")
    p = with_map("hom", "check that a linear map is a morphism")
    p.add_argument("target", help="target map document")
    p.add_argument("--map", required=True, help="linear map document {\"matrix\": ...}")
    p.add_argument("--sample", type=int, default=0, help="also sample this many points and vectors")
    p.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("tree", help="the tree of GL(2) over Q_p", parents=[fmt])
    t.add_argument("--p", type=int, default=2)
    tsub = t.add_subparsers(dest="tree_cmd", required=True, parser_class=_Parser)
    q = tsub.add_parser("neighbors", parents=[fmt])
    q.add_argument("--center", help="generator columns as JSON, e.g. '[[1,0],[0,1]]'")
    q = tsub.add_parser("geodesic", parents=[fmt])
    q.add_argument("--from", dest="source", required=True)
    q.add_argument("--to", dest="target", required=True)
    q = tsub.add_parser("helly", parents=[fmt])
    q.add_argument("--vertices", required=True, help="JSON list of vertices or a file containing one")
    q = tsub.add_parser("dot", parents=[fmt])
    q.add_argument("--center")
    q.add_argument("--radius", type=int, default=1)
    q.add_argument("--cap", type=int, default=tree.DEFAULT_RADIUS_CAP)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "eval": cmd_eval,
    "lattice": cmd_lattice,
    "generic-fiber": cmd_generic_fiber,
    "split": cmd_split,
    "hom": cmd_hom,
    "tree": cmd_tree,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    is_dot = args.command == "tree" and args.tree_cmd == "dot"
    fmt = args.format or ("dot" if is_dot else "json")
    if fmt == "dot" and not is_dot:
        print("toricbt: error: --format dot is only available for 'tree dot'", file=sys.stderr)
        return EXIT_PARSE
    if is_dot and fmt != "dot":
        print("toricbt: error: 'tree dot' only produces DOT output", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.command == "tree":
            try:
                PAdicField(args.p)
            except ValueError as exc:
                raise ParseError(f"--p: {exc}") from None
        result, code = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"toricbt: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ToricBTError, ValueError) as exc:
        print(f"toricbt: error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    sys.stdout.write(result if isinstance(result, str) else _render(result, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
