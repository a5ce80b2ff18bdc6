"""Ultragraphs, the generalized vertex algebra, minimality tests and the
unique decomposition of generalized vertices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .symsets import DeclarationError, Ref, SymbolicSet, format_ref, ref_key


class UltragraphError(ValueError):
    """Semantic problem in an ultragraph description."""


class NotInG0(ValueError):
    pass


class NotRfum2(ValueError):
    def __init__(self, message, residue=None, edge=None):
        super().__init__(message)
        self.residue = residue
        self.edge = edge


@dataclass(frozen=True)
class Edge:
    id: str
    source: Ref
    range: SymbolicSet


@dataclass(frozen=True)
class EdgeFamily:
    """Edges ``id[i]`` for every index ``i >= base``.

    The source is either a fixed vertex (``source_const``) or the vertex
    ``source_family[i + source_offset]``.  The range is either a fixed set
    (``range_const``) or the finite set of vertices ``G[i + off]`` for each
    ``(G, off)`` in ``range_refs``, with out-of-domain refs dropped.
    """

    id: str
    base: int
    source_const: Optional[Ref] = None
    source_family: Optional[str] = None
    source_offset: int = 0
    range_const: Optional[SymbolicSet] = None
    range_refs: Optional[Tuple[Tuple[str, int], ...]] = None


@dataclass(frozen=True)
class GeneralizedVertex:
    """A set in the generalized vertex algebra together with how it was built.

    ``provenance`` is a nested tuple: ``("v", ref)``, ``("r", edge)``,
    ``("union", a, b, ...)``, ``("inter", a, b, ...)`` or ``("set",)`` for a
    finite set given directly.
    """

    set: SymbolicSet
    provenance: tuple = ("set",)

    def __str__(self):
        return str(self.set)


@dataclass(frozen=True)
class Decomposition:
    minimal_infinite_emitters: Tuple[GeneralizedVertex, ...]
    minimal_sinks: Tuple[GeneralizedVertex, ...]
    finite_part: SymbolicSet

    @property
    def minimal_parts(self) -> Tuple[SymbolicSet, ...]:
        return tuple(g.set for g in self.minimal_infinite_emitters + self.minimal_sinks)

    def union(self) -> SymbolicSet:
        out = self.finite_part
        for s in self.minimal_parts:
            out = out.union(s)
        return out


@dataclass(frozen=True)
class Rfum2Verdict:
    holds: bool
    witnesses: Dict[str, Decomposition]
    counterexample: Optional[str] = None
    residue: Optional[SymbolicSet] = None


def edge_label(e: Ref) -> str:
    return format_ref(e)


class Ultragraph:
    """An ultragraph over named vertices and indexed vertex families."""

    def __init__(self, vertex_families=None, vertices=(), edges=(), edge_families=(),
                 weights=None):
        self.vertex_families: Dict[str, int] = dict(vertex_families or {})
        self.vertices: Tuple[str, ...] = tuple(sorted(vertices))
        self.edges: Dict[str, Edge] = {e.id: e for e in edges}
        self.edge_families: Dict[str, EdgeFamily] = {f.id: f for f in edge_families}
        self.weights = dict(weights or {})
        self._cache: dict = {}
        self._validate()

    # ------------------------------------------------------------------ checks

    def _validate(self):
        names = set(self.vertices)
        if len(names) != len(self.vertices):
            raise UltragraphError("duplicate vertex id")
        clash = names & set(self.vertex_families)
        if clash:
            raise UltragraphError(f"id used for a vertex and a family: {sorted(clash)[0]}")
        eclash = set(self.edges) & set(self.edge_families)
        if eclash:
            raise UltragraphError(f"id used for an edge and an edge family: {sorted(eclash)[0]}")
        for e in self.edges.values():
            self._check_ref(e.source, e.id)
            self._check_set(e.range, e.id)
            if e.range.is_empty():
                raise UltragraphError(f"edge {e.id} has an empty range")
        for f in self.edge_families.values():
            if f.source_const is not None:
                self._check_ref(f.source_const, f.id)
            else:
                if f.source_family not in self.vertex_families:
                    raise UltragraphError(f"edge family {f.id}: unknown vertex family {f.source_family}")
                if f.base + f.source_offset < self.vertex_families[f.source_family]:
                    raise UltragraphError(
                        f"edge family {f.id}: source index {f.base + f.source_offset} below family base")
            if f.range_const is not None:
                self._check_set(f.range_const, f.id)
                if f.range_const.is_empty():
                    raise UltragraphError(f"edge family {f.id} has an empty range")
            else:
                for g, _ in f.range_refs:
                    if g not in self.vertex_families:
                        raise UltragraphError(f"edge family {f.id}: unknown vertex family {g}")
                # ranges only grow with the index, so the first edge decides
                if self.range((f.id, f.base)).is_empty():
                    raise UltragraphError(
                        f"edge family {f.id}: range of {f.id}[{f.base}] is empty after clipping")

    def _check_ref(self, ref, owner):
        if isinstance(ref, str):
            if ref not in self.vertices:
                raise UltragraphError(f"{owner}: unknown vertex {ref}")
        else:
            fam, i = ref
            if fam not in self.vertex_families:
                raise UltragraphError(f"{owner}: unknown vertex family {fam}")
            if i < self.vertex_families[fam]:
                raise UltragraphError(f"{owner}: index {i} below base of {fam}")

    def _check_set(self, s: SymbolicSet, owner):
        for n in s.named:
            self._check_ref(n, owner)
        for p in s.parts:
            if p.family not in self.vertex_families:
                raise UltragraphError(f"{owner}: unknown vertex family {p.family}")
            if p.base != self.vertex_families[p.family]:
                raise DeclarationError(f"{owner}: family {p.family} used with base {p.base}")

    # ------------------------------------------------------------ basic sets

    def vset(self, refs) -> SymbolicSet:
        return SymbolicSet.of(refs, self.vertex_families)

    def singleton(self, v: Ref) -> SymbolicSet:
        return self.vset([v])

    def family_set(self, fam: str, excluded=()) -> SymbolicSet:
        return SymbolicSet.cofinite(fam, self.vertex_families[fam], excluded)

    def all_vertices(self) -> SymbolicSet:
        out = self.vset(self.vertices)
        for f in sorted(self.vertex_families):
            out = out.union(self.family_set(f))
        return out

    def edge_bases(self) -> Dict[str, int]:
        return {f.id: f.base for f in self.edge_families.values()}

    def eset(self, refs) -> SymbolicSet:
        return SymbolicSet.of(refs, self.edge_bases())

    def all_edges(self) -> SymbolicSet:
        out = self.eset(self.edges)
        for f in sorted(self.edge_families.values(), key=lambda f: f.id):
            out = out.union(SymbolicSet.cofinite(f.id, f.base))
        return out

    def is_edge(self, e: Ref) -> bool:
        if isinstance(e, str):
            return e in self.edges
        f = self.edge_families.get(e[0])
        return f is not None and e[1] >= f.base

    def is_vertex(self, v: Ref) -> bool:
        if isinstance(v, str):
            return v in self.vertices
        base = self.vertex_families.get(v[0])
        return base is not None and v[1] >= base

    # ------------------------------------------------------------ s and r

    def source(self, e: Ref) -> Ref:
        if isinstance(e, str):
            return self.edges[e].source
        f = self.edge_families[e[0]]
        if e[1] < f.base:
            raise KeyError(f"no edge {format_ref(e)}")
        if f.source_const is not None:
            return f.source_const
        return (f.source_family, e[1] + f.source_offset)

    def range(self, e: Ref) -> SymbolicSet:
        if isinstance(e, str):
            return self.edges[e].range
        f = self.edge_families[e[0]]
        if e[1] < f.base:
            raise KeyError(f"no edge {format_ref(e)}")
        if f.range_const is not None:
            return f.range_const
        refs = [(g, e[1] + off) for g, off in f.range_refs
                if e[1] + off >= self.vertex_families[g]]
        return self.vset(refs)

    def epsilon(self, A: SymbolicSet) -> SymbolicSet:
        """The set of edges whose source lies in A."""
        A = _as_set(A)
        named = [e.id for e in self.edges.values() if e.source in A]
        out = self.eset(named)
        for f in sorted(self.edge_families.values(), key=lambda f: f.id):
            if f.source_const is not None:
                if f.source_const in A:
                    out = out.union(SymbolicSet.cofinite(f.id, f.base))
                continue
            p = A.part(f.source_family)
            if p is None:
                continue
            off = f.source_offset
            if p.cofinite:
                low = max(f.base, p.base - off)
                excluded = set(range(f.base, low)) | {x - off for x in p.indices}
                out = out.union(SymbolicSet.cofinite(f.id, f.base, excluded))
            else:
                idx = [x - off for x in p.indices if x - off >= f.base]
                out = out.union(SymbolicSet.finite_family(f.id, f.base, idx))
        return out

    def epsilon_card(self, A) -> Optional[int]:
        return self.epsilon(A).cardinality()

    def out_edges(self, v: Ref) -> list:
        """Edges leaving a vertex that emits finitely many edges."""
        eps = self.epsilon(self.singleton(v))
        if not eps.is_finite():
            raise ValueError(f"{format_ref(v)} is an infinite emitter")
        return list(eps)

    def infinite_emitter_vertices(self) -> list:
        out = {f.source_const for f in self.edge_families.values() if f.source_const is not None}
        return sorted(out, key=ref_key)

    def sinks(self) -> SymbolicSet:
        """The set of all vertices that emit no edges."""
        cached = self._cache.get("sinks")
        if cached is not None:
            return cached
        sources = [e.source for e in self.edges.values()]
        sources += [f.source_const for f in self.edge_families.values() if f.source_const is not None]
        out = self.vset([v for v in self.vertices if v not in sources])
        for fam, base in sorted(self.vertex_families.items()):
            fixed = {s[1] for s in sources if isinstance(s, tuple) and s[0] == fam}
            starts = [f.base + f.source_offset for f in self.edge_families.values()
                      if f.source_const is None and f.source_family == fam]
            if starts:
                idx = [i for i in range(base, min(starts)) if i not in fixed]
                out = out.union(SymbolicSet.finite_family(fam, base, idx))
            else:
                out = out.union(SymbolicSet.cofinite(fam, base, fixed))
        self._cache["sinks"] = out
        return out

    def is_sink(self, v: Ref) -> bool:
        return v in self.sinks()

    def is_regular(self, v: Ref) -> bool:
        c = self.epsilon(self.singleton(v)).cardinality()
        return c is not None and c > 0

    # ------------------------------------------------------ generalized vertices

    def range_generators(self) -> List[Tuple[SymbolicSet, tuple]]:
        """Distinct fixed ranges with a provenance for each."""
        seen = {}
        for e in sorted(self.edges):
            seen.setdefault(self.edges[e].range, ("r", e))
        for f in sorted(self.edge_families):
            fam = self.edge_families[f]
            if fam.range_const is not None:
                seen.setdefault(fam.range_const, ("r", (f, fam.base)))
        return sorted(seen.items(), key=lambda kv: kv[0].sort_key())

    def infinite_cells(self) -> List[GeneralizedVertex]:
        """All infinite nonempty intersections of range generators."""
        cached = self._cache.get("cells")
        if cached is not None:
            return cached
        cells = {s: p for s, p in self.range_generators() if not s.is_finite()}
        frontier = list(cells.items())
        while frontier:
            new = []
            for s, p in frontier:
                for t, q in list(cells.items()):
                    u = s.intersect(t)
                    if not u.is_finite() and u not in cells:
                        cells[u] = ("inter", p, q)
                        new.append((u, cells[u]))
            frontier = new
        out = [GeneralizedVertex(s, p) for s, p in sorted(cells.items(), key=lambda kv: kv[0].sort_key())]
        self._cache["cells"] = out
        return out

    def in_g0(self, A) -> bool:
        A = _as_set(A)
        if A.is_empty():
            return False
        rest = A
        for c in self.infinite_cells():
            if c.set.is_subset(A):
                rest = rest.difference(c.set)
        return rest.is_finite()

    def generalized_vertex(self, A, provenance=("set",)) -> GeneralizedVertex:
        A = _as_set(A)
        if not self.in_g0(A):
            raise NotInG0(f"{A} is not a generalized vertex")
        return GeneralizedVertex(A, provenance)

    def _has_infinite_cell_below(self, A: SymbolicSet) -> bool:
        return any(c.set != A and c.set.is_subset(A) for c in self.infinite_cells())

    def is_minimal_infinite_emitter(self, A) -> bool:
        A = _as_set(A)
        if self.epsilon(A).is_finite():
            return False
        if A.cardinality() == 1:
            return True
        if any(u in A for u in self.infinite_emitter_vertices()):
            return False
        return not self._has_infinite_cell_below(A)

    def is_minimal_sink(self, A) -> bool:
        A = _as_set(A)
        if A.is_finite() or not self.epsilon(A).is_finite():
            return False
        return not self._has_infinite_cell_below(A)

    def is_minimal(self, A) -> bool:
        return self.is_minimal_infinite_emitter(A) or self.is_minimal_sink(A)

    def minimal_cells(self) -> List[GeneralizedVertex]:
        """Minimal sets of infinite cardinality (emitters and sinks)."""
        cached = self._cache.get("mincells")
        if cached is None:
            cached = [c for c in self.infinite_cells() if self.is_minimal(c.set)]
            self._cache["mincells"] = cached
        return cached

    def is_boundary_range(self, A) -> bool:
        """True when (alpha, A) can be a finite boundary point."""
        A = _as_set(A)
        v = A.single()
        if v is not None and self.is_sink(v):
            return True
        return self.is_minimal(A)

    def decompose(self, A) -> Decomposition:
        """Unique split of A into minimal parts and a finite regular part."""
        A = _as_set(A)
        key = ("dec", A)
        if key in self._cache:
            return self._cache[key]
        if A.is_empty():
            raise NotInG0("the empty set is not a generalized vertex")
        emitters, sinks = [], []
        for c in self.minimal_cells():
            if c.set.is_subset(A):
                (emitters if self.is_minimal_infinite_emitter(c.set) else sinks).append(c)
        for u in self.infinite_emitter_vertices():
            if u in A:
                emitters.append(GeneralizedVertex(self.singleton(u), ("v", u)))
        covered = SymbolicSet()
        for g in emitters + sinks:
            covered = covered.union(g.set)
        rest = A.difference(covered)
        if not rest.is_finite():
            if not self.in_g0(A):
                raise NotInG0(f"{A} is not a generalized vertex")
            raise NotRfum2(f"{A} leaves the infinite residue {rest}", residue=rest)
        emitters.sort(key=lambda g: g.set.sort_key())
        sinks.sort(key=lambda g: g.set.sort_key())
        dec = Decomposition(tuple(emitters), tuple(sinks), rest)
        self._cache[key] = dec
        return dec

    lemma77_decompose = decompose

    def check_rfum2(self) -> Rfum2Verdict:
        witnesses = {}
        todo = [(e, self.edges[e].range) for e in sorted(self.edges)]
        for f in sorted(self.edge_families):
            fam = self.edge_families[f]
            todo.append((f, self.range((f, fam.base))))
        for name, R in todo:
            try:
                witnesses[name] = self.decompose(R)
            except NotRfum2 as exc:
                return Rfum2Verdict(False, witnesses, name, exc.residue)
        return Rfum2Verdict(True, witnesses)

    # ------------------------------------------------------------- utilities

    def max_explicit_index(self) -> int:
        m = max(list(self.vertex_families.values()) + [0])
        for e in self.edges.values():
            m = max(m, e.range.max_index())
            if isinstance(e.source, tuple):
                m = max(m, e.source[1])
        for f in self.edge_families.values():
            m = max(m, f.base + abs(f.source_offset))
            if isinstance(f.source_const, tuple):
                m = max(m, f.source_const[1])
            if f.range_const is not None:
                m = max(m, f.range_const.max_index())
            for _, off in f.range_refs or ():
                m = max(m, f.base + abs(off))
        return m

    def default_truncation(self) -> int:
        return self.max_explicit_index() + 3

    def edges_upto(self, truncation: int) -> list:
        """Named edges plus family edges with index at most ``truncation``."""
        out = sorted(self.edges)
        for f in sorted(self.edge_families):
            fam = self.edge_families[f]
            out.extend((f, i) for i in range(fam.base, truncation + 1))
        return out

    def vertices_upto(self, truncation: int) -> list:
        return self.all_vertices().enumerate_upto(truncation)

    def weight_of(self, e: Ref):
        key = e if isinstance(e, str) else e[0]
        if key in self.weights:
            return self.weights[key]
        return self.weights.get("*")


def _as_set(A) -> SymbolicSet:
    return A.set if isinstance(A, GeneralizedVertex) else A


def graph_to_ultragraph(edges, vertices=()) -> Ultragraph:
    """Directed graph given as (source, target) pairs, with singleton ranges.

    Edge ids are ``e0, e1, ...`` in input order; extra isolated vertices may
    be passed in ``vertices``.
    """
    names = set(vertices)
    for s, t in edges:
        names.add(s)
        names.add(t)
    es = [Edge(f"e{i}", s, SymbolicSet.of([t], {})) for i, (s, t) in enumerate(edges)]
    return Ultragraph({}, sorted(names), es, ())
