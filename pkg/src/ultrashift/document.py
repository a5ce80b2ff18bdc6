"""Reading and writing ultragraph documents (JSON).

Layout::

    {
      "version": "1",
      "vertex_families": [{"id": "V", "base_index": 1}],
      "vertices": ["v0"],
      "edges": [{"id": "e", "source": "v0", "range": "FAMILY(V)"}],
      "edge_families": [
        {"id": "f", "base": 1,
         "source": {"Indexed": {"family": "V", "offset": 0}},
         "range": {"IndexedRefs": [{"family": "V", "offset": 1}]}}
      ],
      "weights": {"e": "2"}
    }

Edge family sources are ``{"Const": ref}`` or ``{"Indexed": {...}}``; ranges
are ``{"ConstSet": set-expr}`` or ``{"IndexedRefs": [...]}``.  The optional
``base`` of an edge family defaults to 0 for constant sources and to the
first index whose source lies in the family otherwise.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .setexpr import ExprError, format_set, parse_ref, parse_set
from .symsets import DeclarationError, format_ref
from .ultragraph import Edge, EdgeFamily, Ultragraph, UltragraphError

VERSION = "1"


class DocumentError(ValueError):
    pass


class MissingVersion(DocumentError):
    pass


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise DocumentError(f"{where}: missing field {key!r}")
    return obj[key]


def _fraction(value, where) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise DocumentError(f"{where}: not a number: {value!r}")


def parse_document(text: str) -> Ultragraph:
    if not text.strip():
        raise MissingVersion("empty document has no version")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return from_dict(data)


def from_dict(data: Any) -> Ultragraph:
    if not isinstance(data, dict) or "version" not in data:
        raise MissingVersion("document has no version tag")
    if str(data["version"]) != VERSION:
        raise DocumentError(f"unsupported version {data['version']!r}")
    try:
        bases = {}
        for f in data.get("vertex_families", []):
            fid = _need(f, "id", "vertex family")
            if fid in bases:
                raise DocumentError(f"duplicate vertex family {fid}")
            base = _need(f, "base_index", f"vertex family {fid}")
            if not isinstance(base, int) or base < 0:
                raise DocumentError(f"vertex family {fid}: base_index must be an integer >= 0")
            bases[fid] = base
        vertices = list(data.get("vertices", []))
        edges = []
        for e in data.get("edges", []):
            eid = _need(e, "id", "edge")
            src = parse_ref(_need(e, "source", f"edge {eid}"))
            rng = parse_set(_need(e, "range", f"edge {eid}"), bases)
            edges.append(Edge(eid, src, rng))
        fams = []
        for f in data.get("edge_families", []):
            fid = _need(f, "id", "edge family")
            src = _need(f, "source", f"edge family {fid}")
            rng = _need(f, "range", f"edge family {fid}")
            kw = {}
            if "Const" in src:
                kw["source_const"] = parse_ref(src["Const"])
                default_base = 0
            elif "Indexed" in src:
                ind = src["Indexed"]
                kw["source_family"] = _need(ind, "family", f"edge family {fid}")
                kw["source_offset"] = int(ind.get("offset", 0))
                if kw["source_family"] not in bases:
                    raise DocumentError(f"edge family {fid}: unknown vertex family {kw['source_family']}")
                default_base = max(0, bases[kw["source_family"]] - kw["source_offset"])
            else:
                raise DocumentError(f"edge family {fid}: source must be Const or Indexed")
            if "ConstSet" in rng:
                kw["range_const"] = parse_set(rng["ConstSet"], bases)
            elif "IndexedRefs" in rng:
                kw["range_refs"] = tuple(
                    (_need(r, "family", f"edge family {fid}"), int(r.get("offset", 0)))
                    for r in rng["IndexedRefs"])
            else:
                raise DocumentError(f"edge family {fid}: range must be ConstSet or IndexedRefs")
            base = f.get("base", default_base)
            if not isinstance(base, int) or base < 0:
                raise DocumentError(f"edge family {fid}: base must be an integer >= 0")
            fams.append(EdgeFamily(fid, base, **kw))
        weights = {}
        for k, v in (data.get("weights") or {}).items():
            w = _fraction(v, f"weight {k}")
            if w <= 1:
                raise DocumentError(f"weight {k}: N must exceed 1")
            weights[k] = w
        ids = [e.id for e in edges]
        if len(set(ids)) != len(ids):
            raise DocumentError("duplicate edge id")
        ug = Ultragraph(bases, vertices, edges, fams, weights)
        for k in weights:
            if k != "*" and k not in ug.edges and k not in ug.edge_families:
                raise DocumentError(f"weight given for unknown edge {k}")
        return ug
    except (ExprError, DeclarationError, UltragraphError) as exc:
        raise DocumentError(str(exc))


def _fmt_fraction(x: Fraction) -> str:
    return str(x)


def to_dict(ug: Ultragraph) -> dict:
    out = {
        "version": VERSION,
        "vertex_families": [{"id": f, "base_index": b} for f, b in sorted(ug.vertex_families.items())],
        "vertices": list(ug.vertices),
        "edges": [{"id": e.id, "source": format_ref(e.source), "range": format_set(e.range)}
                  for e in sorted(ug.edges.values(), key=lambda e: e.id)],
        "edge_families": [],
    }
    for f in sorted(ug.edge_families.values(), key=lambda f: f.id):
        if f.source_const is not None:
            src = {"Const": format_ref(f.source_const)}
        else:
            src = {"Indexed": {"family": f.source_family, "offset": f.source_offset}}
        if f.range_const is not None:
            rng = {"ConstSet": format_set(f.range_const)}
        else:
            rng = {"IndexedRefs": [{"family": g, "offset": o} for g, o in f.range_refs]}
        out["edge_families"].append({"id": f.id, "base": f.base, "source": src, "range": rng})
    if ug.weights:
        out["weights"] = {k: _fmt_fraction(v) for k, v in sorted(ug.weights.items())}
    return out


def serialize(ug: Ultragraph) -> str:
    return json.dumps(to_dict(ug), indent=2, sort_keys=True) + "\n"


def load(path) -> Ultragraph:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())
