"""Ultrapaths, boundary points, cylinder sets and the partial action.

Cylinders here are the generalized sets D_{(beta,B),F,S}: all points that
start with the edge string ``beta`` and then either stop with a range
A contained in B (A not a sink singleton from S), or continue with an
edge sourced in B that is not in F.  With B minimal this is the usual
basic open set; with F = S = {} it is the plain D_{(beta,B)}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from .symsets import Ref, SymbolicSet, format_ref, ref_key
from .ultragraph import NotRfum2, Ultragraph

__all__ = [
    "Ultrapath", "FinitePoint", "EventuallyPeriodic", "FamilyRay", "PathStub",
    "Cylinder", "GroupWord", "OutsideDomain", "NotContained", "InvalidPoint",
]


class OutsideDomain(ValueError):
    pass


class NotContained(ValueError):
    pass


class InvalidPoint(ValueError):
    pass


def _edge_key(e):
    return ref_key(e)


# ---------------------------------------------------------------- ultrapaths

@dataclass(frozen=True)
class Ultrapath:
    edges: tuple
    range: SymbolicSet

    def __len__(self):
        return len(self.edges)

    def __str__(self):
        if not self.edges:
            return f"({self.range},{self.range})"
        return f"({' '.join(format_ref(e) for e in self.edges)},{self.range})"


def check_ultrapath(ug: Ultragraph, p: Ultrapath) -> None:
    """Raise InvalidPoint unless ``p`` is an admissible ultrapath."""
    for e in p.edges:
        if not ug.is_edge(e):
            raise InvalidPoint(f"unknown edge {format_ref(e)}")
    check_word(ug, p.edges)
    if p.range.is_empty():
        raise InvalidPoint("empty range")
    if p.edges and not p.range.is_subset(ug.range(p.edges[-1])):
        raise InvalidPoint(f"range {p.range} is not inside r({format_ref(p.edges[-1])})")
    if not ug.in_g0(p.range):
        raise InvalidPoint(f"range {p.range} is not a generalized vertex")


def check_word(ug: Ultragraph, edges) -> None:
    for a, b in zip(edges, edges[1:]):
        if ug.source(b) not in ug.range(a):
            raise InvalidPoint(f"{format_ref(b)} cannot follow {format_ref(a)}")


def is_admissible(ug: Ultragraph, edges) -> bool:
    try:
        check_word(ug, edges)
    except InvalidPoint:
        return False
    return True


def path_source(ug: Ultragraph, p: Ultrapath) -> SymbolicSet:
    if p.edges:
        return ug.singleton(ug.source(p.edges[0]))
    return p.range


# ------------------------------------------------------------------- points

@dataclass(frozen=True)
class FinitePoint:
    path: Ultrapath

    def __str__(self):
        return str(self.path)


@dataclass(frozen=True)
class EventuallyPeriodic:
    prefix: tuple
    cycle: tuple

    def __str__(self):
        pre = " ".join(format_ref(e) for e in self.prefix)
        cyc = " ".join(format_ref(e) for e in self.cycle)
        return (pre + " " if pre else "") + f"({cyc})^inf"


@dataclass(frozen=True)
class FamilyRay:
    """The infinite path prefix + f[start] f[start+1] f[start+2] ..."""

    prefix: tuple
    family: str
    start: int

    def __str__(self):
        pre = " ".join(format_ref(e) for e in self.prefix)
        return (pre + " " if pre else "") + f"{self.family}[{self.start}] {self.family}[{self.start + 1}] ..."


@dataclass(frozen=True)
class PathStub:
    """Oracle-only stand-in for every point that begins with ``edges``."""

    edges: tuple


BoundaryPoint = Union[FinitePoint, EventuallyPeriodic, FamilyRay]


def primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def periodic(prefix, cycle) -> EventuallyPeriodic:
    """Canonical eventually periodic point: primitive cycle, shortest prefix."""
    prefix, cycle = tuple(prefix), primitive_root(tuple(cycle))
    if not cycle:
        raise InvalidPoint("empty cycle")
    while prefix and prefix[-1] == cycle[-1]:
        prefix = prefix[:-1]
        cycle = (cycle[-1],) + cycle[:-1]
    return EventuallyPeriodic(prefix, cycle)


def point_length(p) -> Optional[int]:
    """Length of a point; None for infinite points and stubs."""
    if isinstance(p, FinitePoint):
        return len(p.path.edges)
    return None


def edge_at(p, i: int):
    """The i-th edge of a point, or None when the point is shorter."""
    if isinstance(p, FinitePoint):
        e = p.path.edges
        return e[i] if i < len(e) else None
    if isinstance(p, EventuallyPeriodic):
        if i < len(p.prefix):
            return p.prefix[i]
        return p.cycle[(i - len(p.prefix)) % len(p.cycle)]
    if isinstance(p, FamilyRay):
        if i < len(p.prefix):
            return p.prefix[i]
        return (p.family, p.start + i - len(p.prefix))
    if isinstance(p, PathStub):
        if i >= len(p.edges):
            raise ValueError("stub too short for this query")
        return p.edges[i]
    raise TypeError(p)


def edges_prefix(p, n: int) -> tuple:
    return tuple(edge_at(p, i) for i in range(n))


def point_source(ug: Ultragraph, p) -> SymbolicSet:
    if isinstance(p, FinitePoint):
        return path_source(ug, p.path)
    return ug.singleton(ug.source(edge_at(p, 0)))


def check_point(ug: Ultragraph, p) -> None:
    """Raise InvalidPoint unless ``p`` is an element of the boundary space."""
    if isinstance(p, FinitePoint):
        check_ultrapath(ug, p.path)
        if not ug.is_boundary_range(p.path.range):
            raise InvalidPoint(f"range {p.path.range} is neither minimal nor a sink singleton")
    elif isinstance(p, EventuallyPeriodic):
        for e in p.prefix + p.cycle:
            if not ug.is_edge(e):
                raise InvalidPoint(f"unknown edge {format_ref(e)}")
        check_word(ug, p.prefix + p.cycle + p.cycle[:1])
    elif isinstance(p, FamilyRay):
        if p.family not in ug.edge_families or p.start < ug.edge_families[p.family].base:
            raise InvalidPoint(f"bad family ray {p}")
        check_word(ug, p.prefix + tuple((p.family, p.start + k) for k in range(8)))
    else:
        raise InvalidPoint(f"not a boundary point: {p!r}")


def finite_point(ug: Ultragraph, edges, A: SymbolicSet) -> FinitePoint:
    p = FinitePoint(Ultrapath(tuple(edges), A))
    check_point(ug, p)
    return p


def concat(ug: Ultragraph, path: Ultrapath, y) -> object:
    """(alpha, A) * y for a point y whose source lies in A."""
    src = point_source(ug, y)
    if not src.is_subset(path.range):
        raise InvalidPoint(f"{y} does not start inside {path.range}")
    if isinstance(y, FinitePoint):
        if not y.path.edges:
            if not path.edges:
                return y
            return FinitePoint(Ultrapath(path.edges, y.path.range))
        return FinitePoint(Ultrapath(path.edges + y.path.edges, y.path.range))
    if isinstance(y, EventuallyPeriodic):
        return periodic(path.edges + y.prefix, y.cycle)
    if isinstance(y, FamilyRay):
        return FamilyRay(path.edges + y.prefix, y.family, y.start)
    raise TypeError(y)


def point_key(p):
    """Deterministic sort key for points."""
    if isinstance(p, FinitePoint):
        return (0, len(p.path.edges), tuple(_edge_key(e) for e in p.path.edges), p.path.range.sort_key())
    if isinstance(p, EventuallyPeriodic):
        return (1, len(p.prefix) + len(p.cycle), tuple(_edge_key(e) for e in p.prefix),
                tuple(_edge_key(e) for e in p.cycle))
    if isinstance(p, FamilyRay):
        return (2, len(p.prefix), tuple(_edge_key(e) for e in p.prefix), p.family, p.start)
    return (3, tuple(_edge_key(e) for e in p.edges))


# ---------------------------------------------------------------- cylinders

@dataclass(frozen=True)
class Cylinder:
    path: Ultrapath
    F: frozenset = frozenset()
    S: frozenset = frozenset()

    @property
    def beta(self) -> tuple:
        return self.path.edges

    @property
    def B(self) -> SymbolicSet:
        return self.path.range

    def __str__(self):
        s = "D" + str(self.path)
        if self.F or self.S:
            f = ",".join(format_ref(e) for e in sorted(self.F, key=_edge_key))
            v = ",".join(format_ref(x) for x in sorted(self.S, key=ref_key))
            s += "{F=[" + f + "],S=[" + v + "]}"
        return s

    def sort_key(self):
        return (len(self.beta), tuple(_edge_key(e) for e in self.beta), self.B.sort_key(),
                tuple(sorted(_edge_key(e) for e in self.F)), tuple(sorted(ref_key(v) for v in self.S)))


def cylinder(ug: Ultragraph, edges, B: SymbolicSet, F=(), S=()) -> Cylinder:
    """Build a canonical cylinder: F trimmed to eps(B), S to the sinks of B."""
    edges = tuple(edges)
    eps = ug.epsilon(B)
    sinks = ug.sinks()
    F = frozenset(e for e in F if e in eps)
    S = frozenset(v for v in S if v in B and v in sinks)
    return Cylinder(Ultrapath(edges, B), F, S)


def check_cylinder(ug: Ultragraph, c: Cylinder) -> None:
    check_ultrapath(ug, c.path)
    eps = ug.epsilon(c.B)
    for e in c.F:
        if e not in eps:
            raise InvalidPoint(f"{format_ref(e)} is not emitted by {c.B}")
    for v in c.S:
        if v not in c.B or not ug.is_sink(v):
            raise InvalidPoint(f"{format_ref(v)} is not a sink of {c.B}")


def contains(ug: Ultragraph, c: Cylinder, p) -> bool:
    """Exact membership of a point (or oracle stub) in a cylinder."""
    beta = c.beta
    n = len(beta)
    L = point_length(p)
    if L is not None and L < n:
        return False
    for i in range(n):
        if edge_at(p, i) != beta[i]:
            return False
    if L == n:
        A = p.path.range
        if not A.is_subset(c.B):
            return False
        v = A.single()
        return not (v is not None and v in c.S)
    e = edge_at(p, n)
    return ug.source(e) in c.B and e not in c.F


def same_length_ranges(ug: Ultragraph, c: Cylinder):
    """Minimal parts of B plus the sink vertices of B outside S."""
    dec = ug.decompose(c.B)
    sinks = ug.sinks().intersect(c.B).difference(ug.vset(c.S))
    return dec.minimal_parts, sinks


def is_empty(ug: Ultragraph, c: Cylinder) -> bool:
    eps = ug.epsilon(c.B).difference(ug.eset(c.F))
    if not eps.is_empty():
        return False
    minimal, sinks = same_length_ranges(ug, c)
    return not minimal and sinks.is_empty()


def in_semiring(ug: Ultragraph, c: Cylinder) -> bool:
    """Membership in the semi-ring: minimal base range, or a finite plain one."""
    if ug.is_minimal(c.B):
        return True
    if c.F or c.S:
        return False
    return c.B.is_finite() and ug.epsilon(c.B).is_finite()


def _is_prefix(a: tuple, b: tuple) -> bool:
    return len(a) <= len(b) and b[:len(a)] == a


def basis_intersect(ug: Ultragraph, c1: Cylinder, c2: Cylinder) -> List[Cylinder]:
    """c1 intersected with c2 as a list of pairwise disjoint cylinders."""
    if len(c1.beta) > len(c2.beta):
        c1, c2 = c2, c1
    if not _is_prefix(c1.beta, c2.beta):
        return []
    if len(c1.beta) < len(c2.beta):
        e = c2.beta[len(c1.beta)]
        if ug.source(e) in c1.B and e not in c1.F and not is_empty(ug, c2):
            return [c2]
        return []
    B = c1.B.intersect(c2.B)
    if B.is_empty():
        return []
    c = cylinder(ug, c1.beta, B, c1.F | c2.F, c1.S | c2.S)
    return [] if is_empty(ug, c) else [c]


def decompose_to_semiring(ug: Ultragraph, c: Cylinder) -> List[Cylinder]:
    """Split a cylinder into disjoint semi-ring cylinders.

    Each minimal part A_i of B keeps its own cylinder, with the edges and
    sinks of the finite overlaps between minimal parts excluded; every
    vertex of those overlaps and of the finite part gets a singleton
    cylinder (or, if some of its edges are in F, one cylinder per allowed
    edge).
    """
    if in_semiring(ug, c):
        return [] if is_empty(ug, c) else [c]
    dec = ug.decompose(c.B)
    parts = dec.minimal_parts
    overlap = SymbolicSet()
    for i, a in enumerate(parts):
        for b in parts[i + 1:]:
            overlap = overlap.union(a.intersect(b))
    out: List[Cylinder] = []
    for a in parts:
        shared = overlap.intersect(a)
        F = set(c.F) | set(ug.epsilon(shared))
        S = set(c.S) | set(ug.sinks().intersect(shared))
        piece = cylinder(ug, c.beta, a, F, S)
        if not is_empty(ug, piece):
            out.append(piece)
    for v in overlap.union(dec.finite_part):
        if ug.is_sink(v):
            if v not in c.S:
                out.append(Cylinder(Ultrapath(c.beta, ug.singleton(v))))
            continue
        outs = ug.out_edges(v)
        if not any(e in c.F for e in outs):
            out.append(Cylinder(Ultrapath(c.beta, ug.singleton(v))))
        else:
            for e in outs:
                if e not in c.F:
                    out.extend(decompose_to_semiring(ug, Cylinder(Ultrapath(c.beta + (e,), ug.range(e)))))
    return out


def _split_all(ug, cs):
    out = []
    for c in cs:
        out.extend(decompose_to_semiring(ug, c))
    return out


def _chain(ug: Ultragraph, P: Cylinder, delta: tuple) -> Tuple[List[Cylinder], Cylinder]:
    """Split P along the longer base ``delta``.

    Returns the pieces of P that avoid delta as a prefix, plus the cylinder
    D_{(delta, r(delta_last))} that remains (assumed to lie inside P).
    """
    n = len(P.beta)
    first = delta[n]
    pieces = [cylinder(ug, P.beta, P.B, set(P.F) | {first}, P.S)]
    for p in range(n + 1, len(delta)):
        pieces.append(cylinder(ug, delta[:p], ug.range(delta[p - 1]), {delta[p]}))
    rest = Cylinder(Ultrapath(delta, ug.range(delta[-1])))
    return _split_all(ug, pieces), rest


def _diff_same_base(ug: Ultragraph, P: Cylinder, d: Cylinder) -> List[Cylinder]:
    beta = P.beta
    if ug.is_minimal(P.B):
        if P.B.is_subset(d.B):
            # d swallows P except what d itself excludes
            out = []
            eps = ug.epsilon(P.B)
            for e in sorted(d.F, key=_edge_key):
                if e in eps and e not in P.F:
                    out.extend(decompose_to_semiring(ug, Cylinder(Ultrapath(beta + (e,), ug.range(e)))))
            for v in sorted(d.S, key=ref_key):
                if v in P.B and v not in P.S:
                    out.append(Cylinder(Ultrapath(beta, ug.singleton(v))))
            return out
        K = P.B.intersect(d.B)
        if not K.is_finite():
            raise NotRfum2(f"minimal set {P.B} meets {d.B} in an infinite proper subset")
        F = set(P.F) | (set(ug.epsilon(K)) - set(d.F))
        S = set(P.S) | (set(ug.sinks().intersect(K)) - set(d.S))
        piece = cylinder(ug, beta, P.B, F, S)
        return [] if is_empty(ug, piece) else [piece]
    out = []
    outside = P.B.difference(d.B)
    if not outside.is_empty():
        out.append(Cylinder(Ultrapath(beta, outside)))
    for v in P.B.intersect(d.B):
        if ug.is_sink(v):
            if v in d.S:
                out.append(Cylinder(Ultrapath(beta, ug.singleton(v))))
            continue
        for e in ug.out_edges(v):
            if e in d.F:
                out.extend(decompose_to_semiring(ug, Cylinder(Ultrapath(beta + (e,), ug.range(e)))))
    return out


def _diff_piece(ug: Ultragraph, P: Cylinder, d: Cylinder) -> List[Cylinder]:
    """P minus d, for P in the semi-ring and any cylinder d."""
    bp, bd = P.beta, d.beta
    if not (_is_prefix(bp, bd) or _is_prefix(bd, bp)):
        return [P]
    if len(bd) < len(bp):
        e = bp[len(bd)]
        inside = ug.source(e) in d.B and e not in d.F
        return [] if inside else [P]
    if len(bp) < len(bd):
        e = bd[len(bp)]
        if not (ug.source(e) in P.B and e not in P.F):
            return [P]
        pieces, rest = _chain(ug, P, bd)
        return pieces + difference(ug, rest, d)
    return _diff_same_base(ug, P, d)


def difference(ug: Ultragraph, c: Cylinder, d: Cylinder) -> List[Cylinder]:
    """c minus d as disjoint semi-ring cylinders (empty pieces dropped)."""
    out = []
    for P in decompose_to_semiring(ug, c):
        for q in _diff_piece(ug, P, d):
            if not is_empty(ug, q):
                out.append(q)
    return out


def is_subset(ug: Ultragraph, c: Cylinder, d: Cylinder) -> bool:
    return not difference(ug, c, d)


def semiring_diff(ug: Ultragraph, C: Cylinder, C0: Cylinder) -> List[Cylinder]:
    """C minus C0 for semi-ring cylinders with C0 inside C.

    The four cases are: same base with C0 minimal (exclusions on F and S),
    same base with C0 finite (exclude its edges and sinks), and a longer
    base for C0, handled by peeling off the chain of cylinders that leave
    C0's base edge by edge and then treating the remaining same-base case.
    """
    for x in (C, C0):
        if not in_semiring(ug, x):
            raise ValueError(f"{x} is not in the semi-ring")
    if not is_subset(ug, C0, C):
        raise NotContained(f"{C0} is not contained in {C}")
    return difference(ug, C, C0)


def pairwise_disjoint(ug: Ultragraph, cs: List[Cylinder]) -> bool:
    for i, a in enumerate(cs):
        for b in cs[i + 1:]:
            if basis_intersect(ug, a, b):
                return False
    return True


def disjointify(ug: Ultragraph, cs: List[Cylinder]) -> List[Cylinder]:
    """Disjoint semi-ring cover of the union of the given cylinders."""
    out: List[Cylinder] = []
    for c in cs:
        pieces = decompose_to_semiring(ug, c)
        for r in out:
            nxt = []
            for p in pieces:
                nxt.extend(difference(ug, p, r))
            pieces = nxt
        out.extend(pieces)
    return out


# ------------------------------------------------------------ group words

@dataclass(frozen=True)
class GroupWord:
    """Reduced word in the free group on the edges: letters (edge, +1 | -1)."""

    letters: tuple = ()

    @staticmethod
    def make(letters) -> "GroupWord":
        out = []
        for e, s in letters:
            if out and out[-1][0] == e and out[-1][1] == -s:
                out.pop()
            else:
                out.append((e, s))
        return GroupWord(tuple(out))

    @staticmethod
    def ab(a=(), b=()) -> "GroupWord":
        """The word a b^-1 for edge strings a and b."""
        return GroupWord.make([(e, 1) for e in a] + [(e, -1) for e in reversed(b)])

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((e, -s) for e, s in reversed(self.letters)))

    def shape(self):
        """(a, b) when the word is a b^-1, else None."""
        signs = [s for _, s in self.letters]
        k = 0
        while k < len(signs) and signs[k] == 1:
            k += 1
        if any(s == 1 for s in signs[k:]):
            return None
        a = tuple(e for e, _ in self.letters[:k])
        b = tuple(e for e, _ in reversed(self.letters[k:]))
        return a, b

    def __str__(self):
        if not self.letters:
            return "0"
        return " ".join(format_ref(e) + ("" if s == 1 else "^-1") for e, s in self.letters)


def top_set(ug: Ultragraph, truncation: int) -> SymbolicSet:
    """Named vertices, family vertices up to the truncation and every infinite cell."""
    out = ug.vset(ug.vertices_upto(truncation))
    for c in ug.minimal_cells():
        out = out.union(c.set)
    return out


def region_Xc(ug: Ultragraph, w: GroupWord, exhaustion: Optional[int] = None) -> List[Cylinder]:
    """Disjoint cover of the domain X_w of the partial action.

    For the empty word the whole space is a directed union; the cover
    returned is the stage D_{(A_n,A_n)} of that exhaustion with
    n = ``exhaustion`` (default: the ultragraph's default truncation).
    """
    sh = w.shape()
    if sh is None:
        return []
    a, b = sh
    if not a and not b:
        n = ug.default_truncation() if exhaustion is None else exhaustion
        T = top_set(ug, n)
        return decompose_to_semiring(ug, Cylinder(Ultrapath((), T)))
    for word in (a, b):
        if word and not (all(ug.is_edge(e) for e in word) and is_admissible(ug, word)):
            return []
    if not b:
        return decompose_to_semiring(ug, Cylinder(Ultrapath(a, ug.range(a[-1]))))
    if not a:
        R = ug.range(b[-1])
        return decompose_to_semiring(ug, Cylinder(Ultrapath((), R)))
    R = ug.range(a[-1]).intersect(ug.range(b[-1]))
    if R.is_empty():
        return []
    return decompose_to_semiring(ug, Cylinder(Ultrapath(a, R)))


def region_XA(ug: Ultragraph, A: SymbolicSet) -> List[Cylinder]:
    """Disjoint cover of the points whose source lies in A."""
    if A.is_empty():
        return []
    return decompose_to_semiring(ug, Cylinder(Ultrapath((), A)))


def in_region(ug: Ultragraph, cover: List[Cylinder], p) -> bool:
    return any(contains(ug, c, p) for c in cover)


def _replace_prefix(ug, p, old: tuple, new: tuple):
    n = len(old)
    if isinstance(p, FinitePoint):
        rest = p.path.edges[n:]
        edges = new + rest
        return FinitePoint(Ultrapath(edges, p.path.range))
    if isinstance(p, EventuallyPeriodic):
        full = p.prefix
        cyc = p.cycle
        while len(full) < n:
            full = full + cyc[:1]
            cyc = cyc[1:] + cyc[:1]
        return periodic(new + full[n:], cyc)
    if isinstance(p, FamilyRay):
        pre = p.prefix
        start = p.start
        while len(pre) < n:
            pre = pre + ((p.family, start),)
            start += 1
        return FamilyRay(new + pre[n:], p.family, start)
    raise TypeError(p)


def theta_apply(ug: Ultragraph, w: GroupWord, x):
    """The partial action: replace the prefix b of x by a, for w = a b^-1."""
    sh = w.shape()
    if sh is None:
        raise OutsideDomain(f"X_{w} is empty")
    a, b = sh
    dom = region_Xc(ug, w.inverse())
    if (a or b) and not in_region(ug, dom, x):
        raise OutsideDomain(f"{x} is not in the domain of theta_{w}")
    if isinstance(x, FinitePoint) and len(x.path.edges) == len(b):
        A = x.path.range
        return FinitePoint(Ultrapath(a, A))
    return _replace_prefix(ug, x, b, a)


def theta_apply_cyl(ug: Ultragraph, w: GroupWord, c: Cylinder) -> Cylinder:
    sh = w.shape()
    if sh is None:
        raise OutsideDomain(f"X_{w} is empty")
    a, b = sh
    if a or b:
        pieces = decompose_to_semiring(ug, c)
        for d in region_Xc(ug, w.inverse()):
            pieces = [q for p in pieces for q in difference(ug, p, d)]
        if pieces or len(c.beta) < len(b):
            raise OutsideDomain(f"{c} is not inside the domain of theta_{w}")
    return Cylinder(Ultrapath(a + c.beta[len(b):], c.B), c.F, c.S)


# ------------------------------------------------------------------ oracle

def oracle_points(ug: Ultragraph, depth: int, truncation: int, stubs: bool = True):
    """Finite points of length at most ``depth`` plus, optionally, one stub for
    each admissible edge string of length ``depth + 1``.

    Edges and vertices of families are limited to index ``truncation``.
    A stub stands for every point beginning with its edges; membership in
    a cylinder whose base is shorter than the stub is decided by the stub.
    """
    edges = ug.edges_upto(truncation)
    verts = set(ug.vertices_upto(truncation))
    sinks = ug.sinks()
    points = []

    def ranges_inside(R: SymbolicSet):
        out = [c.set for c in ug.minimal_cells() if c.set.is_subset(R)]
        out += [ug.singleton(u) for u in ug.infinite_emitter_vertices() if u in R]
        out += [ug.singleton(v) for v in sorted(verts, key=ref_key) if v in R and v in sinks]
        return out

    for A in ranges_inside(ug.all_vertices()):
        points.append(FinitePoint(Ultrapath((), A)))
    layer = [(e,) for e in edges]
    for length in range(1, depth + 2):
        if length == depth + 1:
            if stubs:
                points.extend(PathStub(w) for w in layer)
            break
        nxt = []
        for w in layer:
            R = ug.range(w[-1])
            for A in ranges_inside(R):
                points.append(FinitePoint(Ultrapath(w, A)))
            for e in edges:
                if ug.source(e) in R:
                    nxt.append(w + (e,))
        layer = nxt
    return points
