"""Shift map, cycles and exits, isolated points, stabilizers, groupoid
elements and a sampled checker for continuous orbit equivalence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .boundary import (
    EventuallyPeriodic, FamilyRay, FinitePoint, InvalidPoint, Ultrapath,
    check_point, is_admissible, oracle_points, periodic, point_key,
)
from .symsets import SymbolicSet, format_ref, ref_key
from .ultragraph import Ultragraph


class LengthTooShort(ValueError):
    pass


class RuleGap(ValueError):
    pass


class CertificateError(ValueError):
    pass


# ------------------------------------------------------------------ shift

def shift(p):
    """One application of the shift map."""
    if isinstance(p, FinitePoint):
        edges = p.path.edges
        if not edges:
            raise LengthTooShort(f"the shift is undefined on the length-0 point {p}")
        return FinitePoint(Ultrapath(edges[1:], p.path.range))
    if isinstance(p, EventuallyPeriodic):
        if p.prefix:
            return periodic(p.prefix[1:], p.cycle)
        return periodic((), p.cycle[1:] + p.cycle[:1])
    if isinstance(p, FamilyRay):
        if p.prefix:
            return FamilyRay(p.prefix[1:], p.family, p.start)
        return FamilyRay((), p.family, p.start + 1)
    raise TypeError(p)


def shift_n(p, n: int):
    if n < 0:
        raise ValueError("n must be >= 0")
    for _ in range(n):
        p = shift(p)
    return p


# ----------------------------------------------------------------- cycles

@dataclass(frozen=True)
class Cycle:
    path: Ultrapath
    simple: bool

    def __str__(self):
        return str(self.path)


def _closes(ug: Ultragraph, word: tuple) -> bool:
    return ug.source(word[0]) in ug.range(word[-1])


def is_simple(ug: Ultragraph, word: tuple) -> bool:
    """A closed word is simple when it does not split into two closed words."""
    for k in range(1, len(word)):
        if _closes(ug, word[:k]) and _closes(ug, word[k:]):
            return False
    return True


def make_cycle(ug: Ultragraph, word) -> Cycle:
    word = tuple(word)
    if not word or not is_admissible(ug, word) or not _closes(ug, word):
        raise InvalidPoint(f"{' '.join(format_ref(e) for e in word)} is not a cycle")
    return Cycle(Ultrapath(word, ug.range(word[-1])), is_simple(ug, word))


def _successors(ug: Ultragraph, edges: list) -> Dict:
    return {e: [f for f in edges if ug.source(f) in ug.range(e)] for e in edges}


def find_cycles(ug: Ultragraph, max_len: int, truncation: Optional[int] = None,
                up_to_rotation: bool = False) -> List[Cycle]:
    """All cycles of length at most ``max_len`` over the truncated edge set.

    Each rotation of a closed word is its own cycle; with ``up_to_rotation``
    only the rotation that is least in canonical edge order is kept.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if truncation is None:
        truncation = ug.default_truncation()
    edges = ug.edges_upto(truncation)
    succ = _successors(ug, edges)
    out = []

    def walk(word):
        if _closes(ug, word):
            out.append(word)
        if len(word) < max_len:
            for f in succ[word[-1]]:
                walk(word + (f,))

    for e in edges:
        walk((e,))
    if up_to_rotation:
        def rkey(w):
            return tuple(ref_key(e) for e in w)
        kept = set()
        for w in out:
            kept.add(min((w[i:] + w[:i] for i in range(len(w))), key=rkey))
        out = list(kept)
    out.sort(key=lambda w: (len(w), tuple(ref_key(e) for e in w)))
    return [Cycle(Ultrapath(w, ug.range(w[-1])), is_simple(ug, w)) for w in out]


@dataclass(frozen=True)
class Exit:
    kind: str  # "edge" or "sink"
    position: int  # index i of the cycle edge alpha_i (0-based)
    element: object

    def render(self, cycle_edges) -> str:
        if self.kind == "edge":
            return format_ref(self.element)
        return f"({format_ref(cycle_edges[self.position])},{{{format_ref(self.element)}}})"


def find_exit(ug: Ultragraph, c) -> Optional[Exit]:
    """An exit of the cycle, or None.

    An exit at position i is an edge leaving r(alpha_i) other than the next
    cycle edge, or a sink inside r(alpha_i).
    """
    word = c.path.edges if isinstance(c, Cycle) else tuple(c)
    n = len(word)
    sinks = ug.sinks()
    for i, e in enumerate(word):
        R = ug.range(e)
        nxt = word[(i + 1) % n]
        others = ug.epsilon(R).difference(ug.eset([nxt]))
        if not others.is_empty():
            return Exit("edge", i, others.enumerate(1)[0])
        inside = R.intersect(sinks)
        if not inside.is_empty():
            return Exit("sink", i, inside.enumerate(1)[0])
    return None


def has_exit(ug: Ultragraph, c) -> Tuple[bool, Optional[str]]:
    """(True, witness text) when the cycle has an exit, else (False, None)."""
    word = c.path.edges if isinstance(c, Cycle) else tuple(c)
    x = find_exit(ug, word)
    if x is None:
        return False, None
    return True, x.render(word)


@dataclass(frozen=True)
class Verified:
    holds: bool
    bound: dict
    witness: Optional[Cycle] = None


@dataclass(frozen=True)
class UnknownBeyondBound:
    bound: dict
    reason: str


def check_condition_L(ug: Ultragraph, max_len: int, truncation: Optional[int] = None):
    """Search for a cycle without exits.

    An exitless cycle found inside the bounds is a definite counterexample.
    Without one, the answer is definite only for ultragraphs with no families
    when ``max_len`` reaches the number of vertices: along an exitless cycle
    every range is the single source of the next edge, so its primitive part
    visits each vertex at most once.
    """
    if truncation is None:
        truncation = ug.default_truncation()
    bound = {"max_len": max_len, "truncation": truncation}
    for c in find_cycles(ug, max_len, truncation):
        if find_exit(ug, c) is None:
            return Verified(False, bound, c)
    if not ug.vertex_families and not ug.edge_families and max_len >= len(ug.vertices):
        return Verified(True, bound)
    return UnknownBeyondBound(bound, "every cycle within the bounds has an exit")


# ---------------------------------------------------------- isolated points

@dataclass(frozen=True)
class Isolation:
    isolated: bool
    reason: str
    witness: Optional[str] = None


def classify_isolated(ug: Ultragraph, p) -> Isolation:
    check_point(ug, p)
    if isinstance(p, FinitePoint):
        v = p.path.range.single()
        if v is not None and ug.is_sink(v):
            return Isolation(True, "eventual-sink")
        return Isolation(False, "minimal-range", str(p.path.range))
    if isinstance(p, EventuallyPeriodic):
        ok, w = has_exit(ug, p.cycle)
        if ok:
            return Isolation(False, "cycle-has-exit", w)
        return Isolation(True, "exitless-cycle")
    if isinstance(p, FamilyRay):
        # Beyond every explicitly mentioned index the family behaves uniformly,
        # so S1 and S2 are finite exactly when a generic tail edge has a
        # one-vertex range emitting one edge.
        i0 = max(p.start, ug.max_explicit_index() + 1)
        for i in range(i0, i0 + 3):
            R = ug.range((p.family, i))
            if R.cardinality() != 1:
                return Isolation(False, "wandering-structure", f"|r({p.family}[{i}])| >= 2")
            if ug.epsilon(R).cardinality() != 1:
                return Isolation(False, "wandering-structure", f"|eps(r({p.family}[{i}]))| >= 2")
        return Isolation(True, "eventually-non-wandering")
    raise TypeError(p)


# ------------------------------------------------------------ stabilizers

@dataclass(frozen=True)
class StabReport:
    """Subgroups dZ are stored as the generator d; d = 0 is the trivial group."""

    stab: int
    stab_min: Optional[int]
    stab_ess: int
    stab_ess_min: Optional[int]
    rule: str = "proved"

    @staticmethod
    def group(d: int) -> str:
        return "{0}" if d == 0 else f"{d}Z"

    def as_tuple(self):
        inf = "inf"
        return (self.group(self.stab), self.stab_min if self.stab_min else inf,
                self.group(self.stab_ess), self.stab_ess_min if self.stab_ess_min else inf)


def stabilizers(ug: Ultragraph, p) -> StabReport:
    """Stabilizer and essential stabilizer of a point.

    The essential part for an eventually periodic point follows the derived
    rule: it equals the stabilizer when the cycle has no exit, else {0}.
    """
    if isinstance(p, EventuallyPeriodic):
        d = len(p.cycle)
        if find_exit(ug, p.cycle) is None:
            return StabReport(d, d, d, d, rule="derived")
        return StabReport(d, d, 0, None, rule="derived")
    if isinstance(p, (FinitePoint, FamilyRay)):
        return StabReport(0, None, 0, None)
    raise TypeError(p)


# -------------------------------------------------------- groupoid elements

def _point_len(p):
    return len(p.path.edges) if isinstance(p, FinitePoint) else None


@dataclass(frozen=True)
class GroupoidElement:
    x: object
    k: int
    y: object
    m: int
    n: int

    def __str__(self):
        return f"({self.x}, {self.k}, {self.y})"


def groupoid_element(x, y, m: int, n: int) -> GroupoidElement:
    """(x, m - n, y), certified by shift^m(x) = shift^n(y)."""
    try:
        ok = shift_n(x, m) == shift_n(y, n)
    except LengthTooShort:
        ok = False
    if not ok:
        raise CertificateError(f"shift^{m}({x}) != shift^{n}({y})")
    return GroupoidElement(x, m - n, y, m, n)


def unit(x) -> GroupoidElement:
    return GroupoidElement(x, 0, x, 0, 0)


def groupoid_compose(g1: GroupoidElement, g2: GroupoidElement) -> GroupoidElement:
    if g1.y != g2.x:
        raise ValueError("elements are not composable")
    t = max(g1.n, g2.m)
    return groupoid_element(g1.x, g2.y, g1.m + t - g1.n, g2.n + t - g2.m)


def groupoid_inverse(g: GroupoidElement) -> GroupoidElement:
    return GroupoidElement(g.y, -g.k, g.x, g.n, g.m)


def normal_form_element(ug: Ultragraph, alpha, beta, A: SymbolicSet, y) -> GroupoidElement:
    """((alpha,A)y, |alpha| - |beta|, (beta,A)y)."""
    from .boundary import concat
    x1 = concat(ug, Ultrapath(tuple(alpha), A), y)
    x2 = concat(ug, Ultrapath(tuple(beta), A), y)
    return groupoid_element(x1, x2, len(alpha), len(beta))


# ------------------------------------------------------ orbit equivalence

@dataclass
class BlockMap:
    """Edge-substitution presentation of a map between boundary spaces.

    ``edges`` sends a named edge to a nonempty word of target edges;
    ``edge_families`` sends a family to a family, index by index;
    ``vertices`` and ``vertex_families`` rename ranges likewise.  The
    cocycles ``k`` and ``l`` are keyed by the first edge of a point (its
    name, or the family id for a family edge) with ``"*"`` as default.
    """

    source: Ultragraph
    target: Ultragraph
    edges: Dict[str, tuple] = field(default_factory=dict)
    edge_families: Dict[str, str] = field(default_factory=dict)
    vertices: Dict[str, str] = field(default_factory=dict)
    vertex_families: Dict[str, str] = field(default_factory=dict)
    k: Dict[str, int] = field(default_factory=dict)
    l: Dict[str, int] = field(default_factory=dict)
    inverse: Optional["BlockMap"] = None

    def map_edge(self, e) -> tuple:
        if isinstance(e, str):
            if e not in self.edges or not self.edges[e]:
                raise RuleGap(f"no rule for edge {e}")
            return tuple(self.edges[e])
        if e[0] not in self.edge_families:
            raise RuleGap(f"no rule for edge family {e[0]}")
        return ((self.edge_families[e[0]], e[1]),)

    def map_word(self, word) -> tuple:
        return tuple(f for e in word for f in self.map_edge(e))

    def map_set(self, A: SymbolicSet) -> SymbolicSet:
        named = []
        for v in A.named:
            if v not in self.vertices:
                raise RuleGap(f"no rule for vertex {v}")
            named.append(self.vertices[v])
        out = self.target.vset(named)
        for p in A.parts:
            g = self.vertex_families.get(p.family)
            if g is None:
                raise RuleGap(f"no rule for vertex family {p.family}")
            base = self.target.vertex_families.get(g)
            if base != p.base:
                raise RuleGap(f"family {p.family} and its image {g} have different bases")
            if p.cofinite:
                out = out.union(SymbolicSet.cofinite(g, base, p.indices))
            else:
                out = out.union(SymbolicSet.finite_family(g, base, p.indices))
        return out

    def apply(self, x):
        if isinstance(x, FinitePoint):
            y = FinitePoint(Ultrapath(self.map_word(x.path.edges), self.map_set(x.path.range)))
        elif isinstance(x, EventuallyPeriodic):
            y = periodic(self.map_word(x.prefix), self.map_word(x.cycle))
        elif isinstance(x, FamilyRay):
            if x.family not in self.edge_families:
                raise RuleGap(f"no rule for edge family {x.family}")
            y = FamilyRay(self.map_word(x.prefix), self.edge_families[x.family], x.start)
        else:
            raise TypeError(x)
        try:
            check_point(self.target, y)
        except InvalidPoint as exc:
            raise RuleGap(f"image of {x} is not a point of the target: {exc}")
        return y

    def _cocycle(self, table, x) -> int:
        e = _first_edge(x)
        key = e if isinstance(e, str) else e[0]
        if key in table:
            return table[key]
        if "*" in table:
            return table["*"]
        raise RuleGap(f"no cocycle value for {format_ref(e)}")

    def k_of(self, x) -> int:
        return self._cocycle(self.k, x)

    def l_of(self, x) -> int:
        return self._cocycle(self.l, x)


def _first_edge(x):
    if isinstance(x, FinitePoint):
        if not x.path.edges:
            raise LengthTooShort("length-0 point")
        return x.path.edges[0]
    if isinstance(x, EventuallyPeriodic):
        return (x.prefix + x.cycle)[0]
    if isinstance(x, FamilyRay):
        return x.prefix[0] if x.prefix else (x.family, x.start)
    raise TypeError(x)


def identity_map(ug: Ultragraph) -> BlockMap:
    """The identity with k = 0 and l = 1, in both directions."""
    def one():
        return BlockMap(
            ug, ug,
            edges={e: (e,) for e in ug.edges},
            edge_families={f: f for f in ug.edge_families},
            vertices={v: v for v in ug.vertices},
            vertex_families={f: f for f in ug.vertex_families},
            k={"*": 0}, l={"*": 1})
    h = one()
    h.inverse = one()
    return h


def admissible_words(ug: Ultragraph, max_len: int, truncation: int) -> List[tuple]:
    edges = ug.edges_upto(truncation)
    succ = _successors(ug, edges)
    out = [()]
    layer = [(e,) for e in edges]
    for _ in range(max_len):
        out.extend(layer)
        layer = [w + (f,) for w in layer for f in succ[w[-1]]]
    return out


def enumerate_points(ug: Ultragraph, depth: int, truncation: Optional[int] = None,
                     cycle_max: int = 6, prefix_max: int = 4) -> list:
    """Representable points: finite points up to ``depth`` edges, eventually
    periodic points with bounded prefix and cycle, and family rays."""
    if truncation is None:
        truncation = ug.default_truncation()
    pts = set(oracle_points(ug, depth, truncation, stubs=False))
    prefixes = admissible_words(ug, prefix_max, truncation)
    for c in find_cycles(ug, cycle_max, truncation):
        w = c.path.edges
        for mu in prefixes:
            if not mu or ug.source(w[0]) in ug.range(mu[-1]):
                pts.add(periodic(mu, w))
    for f, fam in sorted(ug.edge_families.items()):
        if fam.source_const is not None:
            continue
        for i in range(fam.base, truncation + 1):
            ray = FamilyRay((), f, i)
            try:
                check_point(ug, ray)
            except (InvalidPoint, KeyError):
                continue
            pts.add(ray)
    return sorted(pts, key=point_key)


def sample_points(ug: Ultragraph, n: int, seed: int, depth: int,
                  truncation: Optional[int] = None) -> list:
    pop = enumerate_points(ug, depth, truncation)
    rng = random.Random(seed)
    chosen = rng.sample(pop, min(n, len(pop)))
    return sorted(chosen, key=point_key)


def _has_shift(x) -> bool:
    return not (isinstance(x, FinitePoint) and not x.path.edges)


def _is_periodic(x) -> bool:
    return isinstance(x, EventuallyPeriodic) and not x.prefix


def _coe_side(h: BlockMap, xs, label: str, fails: list):
    for x in xs:
        if not _has_shift(x):
            continue
        try:
            hx = h.apply(x)
            lhs = shift_n(hx, h.l_of(x))
            rhs = shift_n(h.apply(shift(x)), h.k_of(x))
        except LengthTooShort as exc:
            fails.append({"identity": label, "point": str(x), "detail": str(exc)})
            continue
        if lhs != rhs:
            fails.append({"identity": label, "point": str(x),
                          "detail": f"{lhs} != {rhs}"})


def _eq_side(h: BlockMap, src: Ultragraph, tgt: Ultragraph, xs, label: str, fails: list):
    for x in xs:
        if not _is_periodic(x):
            continue
        p = stabilizers(src, x).stab_min
        total = 0
        y = x
        for _ in range(p):
            total += h.l_of(y) - h.k_of(y)
            y = shift(y)
        want = stabilizers(tgt, h.apply(x)).stab_min
        if abs(total) != want:
            fails.append({"equation": label, "point": str(x),
                          "lhs": abs(total), "rhs": want})


def check_orbit_equivalence(h: BlockMap, samples: int = 100, depth: int = 8,
                            seed: int = 0, truncation: Optional[int] = None,
                            cycle_max: int = 6, prefix_max: int = 4) -> dict:
    """Sampled verification of a continuous orbit equivalence.

    Returns a report with the four checks, each carrying ``pass`` and its
    witnesses, plus the number of sampled points on each side.
    """
    if h.inverse is None:
        raise RuleGap("the inverse direction is required")
    g = h.inverse
    X, Y = h.source, h.target

    def draw(ug):
        pop = enumerate_points(ug, depth, truncation, cycle_max, prefix_max)
        rng = random.Random(seed)
        return sorted(rng.sample(pop, min(samples, len(pop))), key=point_key)

    xs, ys = draw(X), draw(Y)

    coe = []
    _coe_side(h, xs, "forward", coe)
    _coe_side(g, ys, "inverse", coe)
    for x in xs:
        if g.apply(h.apply(x)) != x:
            coe.append({"identity": "inverse-after-forward", "point": str(x),
                        "detail": f"h^-1(h(x)) = {g.apply(h.apply(x))}"})
    for y in ys:
        if h.apply(g.apply(y)) != y:
            coe.append({"identity": "forward-after-inverse", "point": str(y),
                        "detail": f"h(h^-1(y)) = {h.apply(g.apply(y))}"})

    stab = []
    for side, m, src, tgt, pts in (("forward", h, X, Y, xs), ("inverse", g, Y, X, ys)):
        for x in pts:
            a = stabilizers(src, x).stab_min is not None
            b = stabilizers(tgt, m.apply(x)).stab_min is not None
            if a != b:
                stab.append({"direction": side, "point": str(x),
                             "finite_before": a, "finite_after": b})

    eqs = []
    per_x = [x for x in enumerate_points(X, depth, truncation, cycle_max, 0) if _is_periodic(x)]
    per_y = [y for y in enumerate_points(Y, depth, truncation, cycle_max, 0) if _is_periodic(y)]
    _eq_side(h, X, Y, per_x, "1", eqs)
    _eq_side(g, Y, X, per_y, "2", eqs)

    conj = []
    for side, m, pts in (("forward", h, xs), ("inverse", g, ys)):
        for x in pts:
            if _has_shift(x) and m.l_of(x) != m.k_of(x) + 1:
                conj.append({"direction": side, "point": str(x),
                             "k": m.k_of(x), "l": m.l_of(x)})

    return {
        "samples": {"source": len(xs), "target": len(ys)},
        "periodic_points": {"source": len(per_x), "target": len(per_y)},
        "coe_identities": {"pass": not coe, "witnesses": coe},
        "stab_preservation": {"pass": not stab, "witnesses": stab},
        "eq1_eq2": {"pass": not eqs, "witnesses": eqs},
        "eventual_conjugacy": {"pass": not conj, "witnesses": conj},
    }
