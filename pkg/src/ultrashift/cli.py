"""Command line front end.

Every command prints one report, as JSON (default) or text, and exits with
0 (success, feasible, holds), 1 (negative verdict), 2 (usage or input
error) or 3 (unknown within the search bounds).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from importlib import resources

from . import boundary as bd
from . import dynamics as dy
from . import kms
from .document import DocumentError, parse_document
from .setexpr import ExprError, format_set, parse_ref, parse_set
from .symsets import DeclarationError, format_ref
from .ultragraph import NotInG0, NotRfum2

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2, 3


class InputError(ValueError):
    pass


# ------------------------------------------------------------------ numbers

def num(x, exact: bool = True) -> dict:
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 18
        dec = Decimal(x.numerator) / Decimal(x.denominator)
    out = {"decimal": format(dec.normalize(), "f") if dec != 0 else "0"}
    if exact:
        out["exact"] = str(x)
    return out


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return num(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


# ------------------------------------------------------------------ inputs

def fixture_names():
    return sorted(p.name for p in resources.files("ultrashift").joinpath("fixtures").iterdir()
                  if p.name.endswith(".json"))


def read_text(path: str) -> str:
    """Read a file; a bare bundled fixture name is accepted too."""
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    name = os.path.basename(path)
    root = resources.files("ultrashift").joinpath("fixtures")
    for candidate in (root.joinpath(name), root.joinpath("inputs", name)):
        if name.endswith(".json") and candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    raise InputError(f"no such file: {path}")


def _edges(ug, items):
    out = []
    for t in items:
        e = parse_ref(t)
        if not ug.is_edge(e):
            raise InputError(f"unknown edge {t}")
        out.append(e)
    return tuple(out)


def parse_point(ug, text: str):
    data = json.loads(text)
    if "ray" in data:
        r = data["ray"]
        p = bd.FamilyRay(_edges(ug, r.get("prefix", [])), r["family"], int(r["start"]))
    elif "cycle" in data:
        p = bd.periodic(_edges(ug, data.get("prefix", [])), _edges(ug, data["cycle"]))
    elif "range" in data:
        edges = _edges(ug, data.get("path", []))
        A = parse_set(data["range"], ug.vertex_families, ug.range)
        p = bd.FinitePoint(bd.Ultrapath(edges, A))
    else:
        raise InputError("a point needs 'range', 'cycle' or 'ray'")
    bd.check_point(ug, p)
    return p


def parse_cylinder(ug, text: str) -> bd.Cylinder:
    data = json.loads(text)
    edges = _edges(ug, data.get("path", []))
    if "range" in data:
        B = parse_set(data["range"], ug.vertex_families, ug.range)
    elif edges:
        B = ug.range(edges[-1])
    else:
        raise InputError("a cylinder needs a path or a range")
    F = _edges(ug, data.get("F", []))
    S = [parse_ref(v) for v in data.get("S", [])]
    c = bd.Cylinder(bd.Ultrapath(edges, B), frozenset(F), frozenset(S))
    bd.check_cylinder(ug, c)
    return c


def cyl_json(c: bd.Cylinder) -> dict:
    return {
        "path": [format_ref(e) for e in c.beta],
        "range": format_set(c.B),
        "F": sorted(format_ref(e) for e in c.F),
        "S": sorted(format_ref(v) for v in c.S),
        "text": str(c),
    }


def parse_map(source, data: dict, base_dir: str) -> dy.BlockMap:
    if "target" not in data:
        raise InputError("the map file needs a 'target' document")
    tpath = data["target"]
    if not os.path.isabs(tpath) and not os.path.exists(tpath):
        tpath = os.path.join(base_dir, tpath)
    target = parse_document(read_text(tpath))

    def side(src, tgt, d):
        return dy.BlockMap(
            src, tgt,
            edges={k: tuple(parse_ref(x) for x in v) for k, v in d.get("edges", {}).items()},
            edge_families=dict(d.get("edge_families", {})),
            vertices=dict(d.get("vertices", {})),
            vertex_families=dict(d.get("vertex_families", {})),
            k={k: int(v) for k, v in d.get("k", {}).items()},
            l={k: int(v) for k, v in d.get("l", {}).items()})

    if "forward" not in data or "inverse" not in data:
        raise InputError("the map file needs 'forward' and 'inverse' tables")
    h = side(source, target, data["forward"])
    h.inverse = side(target, source, data["inverse"])
    return h


# ------------------------------------------------------------------ reports

def make_report(command: str, digest: str, verdict: str, witnesses=None, tables=None) -> dict:
    return {
        "command": command,
        "inputs_digest": digest,
        "verdict": verdict,
        "witnesses": witnesses or [],
        "tables": tables or {},
    }


def render_text(report: dict) -> str:
    lines = [f"command: {report['command']}", f"verdict: {report['verdict']}",
             f"inputs: {report['inputs_digest'][:16]}"]

    def show(x):
        if isinstance(x, dict) and "decimal" in x and set(x) <= {"decimal", "exact"}:
            return x.get("exact", x["decimal"])
        if isinstance(x, (dict, list)):
            return json.dumps(x, sort_keys=True)
        return str(x)

    for w in report["witnesses"]:
        lines.append(f"witness: {show(w)}")
    for name in sorted(report["tables"]):
        t = report["tables"][name]
        lines.append(f"[{name}]")
        if isinstance(t, dict):
            for k in sorted(t):
                lines.append(f"  {k}: {show(t[k])}")
        elif isinstance(t, list):
            for row in t:
                lines.append(f"  {show(row)}")
        else:
            lines.append(f"  {show(t)}")
    return "\n".join(lines) + "\n"


def emit(report: dict, fmt: str, out) -> None:
    report = _jsonable(report)
    if fmt == "text":
        out.write(render_text(report))
    else:
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------- commands

def _decomp_json(dec) -> dict:
    return {
        "minimal_infinite_emitters": [format_set(g.set) for g in dec.minimal_infinite_emitters],
        "minimal_sinks": [format_set(g.set) for g in dec.minimal_sinks],
        "finite_part": format_set(dec.finite_part),
    }


def _rfum2_table(ug):
    v = ug.check_rfum2()
    table = {k: _decomp_json(d) for k, d in v.witnesses.items()}
    return v, table


def cmd_validate(ug, args):
    v, _ = _rfum2_table(ug)
    tables = {"summary": {
        "named_vertices": len(ug.vertices),
        "vertex_families": len(ug.vertex_families),
        "edges": len(ug.edges),
        "edge_families": len(ug.edge_families),
        "rfum2": v.holds,
    }}
    return EXIT_OK, "valid", [], tables


def _cycle_json(ug, c):
    ok, w = dy.has_exit(ug, c)
    return {"cycle": str(c), "simple": c.simple, "exit": w}


def cmd_analyze(ug, args):
    v, table = _rfum2_table(ug)
    T = args.truncation if args.truncation is not None else ug.default_truncation()
    tables = {
        "rfum2": table,
        "sinks": str(ug.sinks()),
        "infinite_emitters": [format_ref(u) for u in ug.infinite_emitter_vertices()],
        "minimal_sets": [format_set(c.set) for c in ug.minimal_cells()],
        "cycles": [_cycle_json(ug, c) for c in dy.find_cycles(ug, args.max_len, T, True)],
    }
    if not v.holds:
        return EXIT_NEGATIVE, "rfum2-fails", [{"edge": format_ref(v.counterexample),
                                              "residue": str(v.residue)}], tables
    return EXIT_OK, "rfum2-holds", [], tables


def cmd_decompose(ug, args):
    A = parse_set(args.set, ug.vertex_families, ug.range)
    if not ug.in_g0(A):
        return EXIT_NEGATIVE, "not-a-generalized-vertex", [{"set": str(A)}], {}
    try:
        dec = ug.decompose(A)
    except NotRfum2 as exc:
        return EXIT_NEGATIVE, "no-decomposition", [{"residue": str(exc.residue)}], {}
    return EXIT_OK, "decomposed", [], {"decomposition": _decomp_json(dec)}


def cmd_cylinders(ug, args):
    c1 = parse_cylinder(ug, args.c1)
    if args.op == "split":
        parts = bd.decompose_to_semiring(ug, c1)
        return EXIT_OK, "split", [], {"pieces": [cyl_json(p) for p in parts]}
    if args.c2 is None:
        raise InputError(f"cylinders {args.op} needs --c2")
    c2 = parse_cylinder(ug, args.c2)
    if args.op == "intersect":
        parts = bd.basis_intersect(ug, c1, c2)
        verdict = "empty" if not parts else "nonempty"
    else:
        parts = bd.difference(ug, c1, c2)
        verdict = "empty" if not parts else "nonempty"
    return EXIT_OK, verdict, [], {"pieces": [cyl_json(p) for p in parts]}


def cmd_dynamics(ug, args):
    T = args.truncation if args.truncation is not None else ug.default_truncation()
    if args.op == "cycles":
        cs = dy.find_cycles(ug, args.max_len, T)
        return EXIT_OK, f"{len(cs)} cycles", [], {
            "bound": {"max_len": args.max_len, "truncation": T},
            "cycles": [_cycle_json(ug, c) for c in cs]}
    if args.op == "condition-l":
        res = dy.check_condition_L(ug, args.max_len, T)
        if isinstance(res, dy.UnknownBeyondBound):
            return EXIT_UNKNOWN, "unknown-beyond-bound", [], {"bound": res.bound, "reason": res.reason}
        if res.holds:
            return EXIT_OK, "holds", [], {"bound": res.bound}
        return EXIT_NEGATIVE, "fails", [{"exitless_cycle": str(res.witness)}], {"bound": res.bound}
    if args.point is None:
        raise InputError(f"dynamics {args.op} needs --point")
    p = parse_point(ug, args.point)
    if args.op == "isolated":
        r = dy.classify_isolated(ug, p)
        w = [{"reason": r.reason, "detail": r.witness}] if r.witness else []
        return (EXIT_OK if r.isolated else EXIT_NEGATIVE,
                "isolated" if r.isolated else "not-isolated", w,
                {"point": str(p), "reason": r.reason})
    s = dy.stabilizers(ug, p)
    stab, smin, ess, emin = s.as_tuple()
    return EXIT_OK, "computed", [], {"point": str(p), "stabilizers": {
        "stab": stab, "stab_min": smin, "stab_ess": ess, "stab_ess_min": emin,
        "stab_ess_rule": s.rule}}


def _solution_tables(ug, sol, system):
    exact = sol.exact
    m = sol.m
    values = {k: num(v, exact) for k, v in sol.assignment.items()}
    sets = {}
    for e in sorted(ug.edges):
        sets[f"r({e})"] = num(m(ug.range(e)), exact)
    for c in system.layout.cells:
        sets[format_set(c)] = num(m(c), exact)
    for v in ug.vertices:
        sets[f"{{{v}}}"] = num(m.vertex(v), exact)
    return {
        "variables": values,
        "sets": sets,
        "solution": {"dimension": sol.dimension, "exact": exact,
                     "m1_attained": sol.attained, "truncation": system.layout.T},
    }


def cmd_kms_solve(ug, args):
    system = kms.build_constraints(ug, args.beta, args.truncation)
    res = kms.solve_kms(system)
    if isinstance(res, kms.Infeasible):
        return EXIT_NEGATIVE, "infeasible", [{"reason": res.reason}], {"beta": args.beta}
    tables = _solution_tables(ug, res, system)
    tables["beta"] = args.beta
    return EXIT_OK, "feasible", [], tables


def cmd_kms_verify(ug, args):
    if args.m is None:
        raise InputError("kms verify needs --m FILE")
    m = kms.m_from_document(ug, read_text(args.m))
    viol = kms.verify_m(ug, m, args.beta, kms.as_fraction(args.tol))
    ws = [{"condition": v["condition"], "set": v["set"], "residual": v["residual"]} for v in viol]
    classes = sorted({(v["condition"], v["set"]) for v in viol})
    tables = {"beta": args.beta, "tol": args.tol,
              "violation_classes": [f"{c} at {s}" for c, s in classes]}
    if viol:
        return EXIT_NEGATIVE, "violations", ws, tables
    return EXIT_OK, "accepted", [], tables


def cmd_ground(ug, args):
    system = kms.build_constraints(ug, None, args.truncation,
                                   mode="ground" if args.variant == "finite-regular" else "ground-edge-zero")
    res = kms.solve_kms(system)
    if isinstance(res, kms.Infeasible):
        return EXIT_NEGATIVE, "infeasible", [{"reason": res.reason}], {"variant": args.variant}
    tables = _solution_tables(ug, res, system)
    forced = kms.forced_values(system)
    tables["forced"] = {k: (None if v is None else num(v)) for k, v in forced.items()}
    tables["variant"] = args.variant
    return EXIT_OK, "feasible", [], tables


def cmd_sweep(ug, args):
    betas = [b for b in args.betas.split(",") if b.strip()] if args.betas else []
    rows = kms.beta_sweep(ug, betas, args.truncation)
    table = [{"beta": str(r["beta"]), "feasible": r["feasible"], "dimension": r["dimension"]}
             for r in rows]
    verdict = "all-feasible" if all(r["feasible"] for r in rows) else "some-infeasible"
    return EXIT_OK, verdict, [], {"sweep": table}


def cmd_orbit(ug, args):
    if args.map is None:
        raise InputError("orbit-check needs --map FILE")
    data = json.loads(read_text(args.map))
    h = parse_map(ug, data, os.path.dirname(os.path.abspath(args.map)))
    rep = dy.check_orbit_equivalence(h, args.samples, args.depth, args.seed, args.truncation)
    checks = ("coe_identities", "stab_preservation", "eq1_eq2")
    ok = all(rep[c]["pass"] for c in checks)
    ws = []
    for c in checks + ("eventual_conjugacy",):
        for w in rep[c]["witnesses"][:20]:
            ws.append(dict(w, check=c))
    tables = {c: rep[c]["pass"] for c in checks + ("eventual_conjugacy",)}
    tables["samples"] = rep["samples"]
    tables["periodic_points"] = rep["periodic_points"]
    return (EXIT_OK if ok else EXIT_NEGATIVE,
            "orbit-equivalence-consistent" if ok else "orbit-equivalence-fails", ws, {"checks": tables})


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("document", help="ultragraph document (path or bundled fixture name)")
    common.add_argument("--depth", type=int, default=8)
    common.add_argument("--max-len", type=int, default=6)
    common.add_argument("--truncation", "--truncate", type=int, default=None)
    common.add_argument("--tol", default="0")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="ultrashift", description="Ultragraph shift space analyses.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common]).set_defaults(func=cmd_validate)
    sub.add_parser("analyze", parents=[common]).set_defaults(func=cmd_analyze)
    d = sub.add_parser("decompose", parents=[common])
    d.add_argument("--set", required=True)
    d.set_defaults(func=cmd_decompose)

    c = sub.add_parser("cylinders")
    csub = c.add_subparsers(dest="op", required=True)
    for op in ("intersect", "diff", "split"):
        x = csub.add_parser(op, parents=[common])
        x.add_argument("--c1", required=True)
        x.add_argument("--c2")
        x.set_defaults(func=cmd_cylinders)

    y = sub.add_parser("dynamics")
    ysub = y.add_subparsers(dest="op", required=True)
    for op in ("cycles", "condition-l", "isolated", "stab"):
        x = ysub.add_parser(op, parents=[common])
        x.add_argument("--point")
        x.set_defaults(func=cmd_dynamics)

    k = sub.add_parser("kms")
    ksub = k.add_subparsers(dest="op", required=True)
    x = ksub.add_parser("solve", parents=[common])
    x.add_argument("--beta", default="1")
    x.set_defaults(func=cmd_kms_solve)
    x = ksub.add_parser("verify", parents=[common])
    x.add_argument("--beta", default="1")
    x.add_argument("--m")
    x.set_defaults(func=cmd_kms_verify)
    for parent in (ksub, sub):
        x = parent.add_parser("ground", parents=[common])
        x.add_argument("--variant", choices=("finite-regular", "edge-zero"), default="finite-regular")
        x.set_defaults(func=cmd_ground)
        x = parent.add_parser("sweep", parents=[common])
        x.add_argument("--betas", default="")
        x.set_defaults(func=cmd_sweep)

    o = sub.add_parser("orbit-check", parents=[common])
    o.add_argument("--map")
    o.add_argument("--samples", type=int, default=100)
    o.set_defaults(func=cmd_orbit)
    return p


def _digest(text: str, args) -> str:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "format")}
    h = hashlib.sha256()
    h.update(text.encode("utf-8"))
    h.update(json.dumps(flags, sort_keys=True, default=str).encode("utf-8"))
    for key in ("m", "map"):
        path = getattr(args, key, None)
        if path:
            h.update(read_text(path).encode("utf-8"))
    return h.hexdigest()


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    command = args.command + (f" {args.op}" if getattr(args, "op", None) else "")
    fmt = getattr(args, "format", "json")
    try:
        text = read_text(args.document)
        ug = parse_document(text)
        digest = _digest(text, args)
        code, verdict, ws, tables = args.func(ug, args)
    except (DocumentError, ExprError, DeclarationError, InputError, json.JSONDecodeError,
            bd.InvalidPoint, kms.KmsError, dy.RuleGap, KeyError, ValueError) as exc:
        if isinstance(exc, (NotRfum2,)):
            report = make_report(command, "", "rfum2-fails", [{"error": str(exc)}])
            emit(report, fmt, out)
            return EXIT_NEGATIVE
        if isinstance(exc, NotInG0):
            report = make_report(command, "", "not-a-generalized-vertex", [{"error": str(exc)}])
            emit(report, fmt, out)
            return EXIT_NEGATIVE
        if isinstance(exc, kms.SizeLimit):
            report = make_report(command, "", "size-limit", [{"error": str(exc)}])
            emit(report, fmt, out)
            return EXIT_UNKNOWN
        report = make_report(command, "", "error", [{"error": f"{type(exc).__name__}: {exc}"}])
        emit(report, fmt, out)
        return EXIT_USAGE
    emit(make_report(command, digest, verdict, ws, tables), fmt, out)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
