"""Shared loaders, generators and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from importlib import resources

from ultrashift import boundary as bd
from ultrashift import kms
from ultrashift.document import parse_document

FIXTURES = resources.files("ultrashift").joinpath("fixtures")
INPUTS = FIXTURES.joinpath("inputs")


def fixture_text(name: str) -> str:
    return FIXTURES.joinpath(name).read_text(encoding="utf-8")


def fixture(name: str):
    return parse_document(fixture_text(name))


def fixture_names():
    return sorted(p.name for p in FIXTURES.iterdir() if p.name.endswith(".json"))


def input_path(name: str) -> str:
    return str(INPUTS.joinpath(name))


def fixture_path(name: str) -> str:
    return str(FIXTURES.joinpath(name))


# Fixtures whose ranges all decompose, used by the measure-level tests.
RFUM2_FIXTURES = [n for n in fixture_names() if n != "nested_ranges.json"]


# ------------------------------------------------------------ membership

def oracle_member(ug, c: bd.Cylinder, p) -> bool:
    """Direct membership of an oracle point in a cylinder.

    Written independently of ``boundary.contains``: the point is unfolded
    into a list of edges and a final range (or a stub of edges only).
    """
    if isinstance(p, bd.PathStub):
        word, final = tuple(p.edges), None
    else:
        word, final = tuple(p.path.edges), p.path.range
    n = len(c.beta)
    if len(word) < n or word[:n] != tuple(c.beta):
        return False
    if len(word) > n:
        e = word[n]
        return ug.source(e) in c.B and e not in c.F
    # same length: the terminal range must lie in B and avoid the S sinks
    if final is None:
        return False
    if not final.is_subset(c.B):
        return False
    single = final.single()
    return single is None or single not in c.S


def oracle_set(ug, cs, points):
    return {i for i, p in enumerate(points) if any(oracle_member(ug, c, p) for c in cs)}


# ------------------------------------------------------------ generators

def words(ug, T, max_len):
    """Admissible edge strings of length 1..max_len over edges up to index T."""
    edges = ug.edges_upto(T)
    layer = [(e,) for e in edges]
    out = list(layer)
    for _ in range(max_len - 1):
        nxt = []
        for w in layer:
            R = ug.range(w[-1])
            nxt.extend(w + (e,) for e in edges if ug.source(e) in R)
        layer = nxt
        out.extend(layer)
    return out


def _bases(ug, R, T):
    """Semi-ring bases inside R: minimal parts, sink singletons and finite
    sets of vertices with finite emission."""
    out = [c.set for c in ug.minimal_cells() if c.set.is_subset(R)]
    verts = [v for v in ug.vertices_upto(T) if v in R]
    out += [ug.singleton(v) for v in verts]
    fin = [v for v in verts if ug.epsilon(ug.singleton(v)).is_finite()]
    for k in (2, 3):
        for combo in itertools.combinations(fin, k):
            out.append(ug.vset(combo))
    return out


def random_semiring_cylinder(ug, rng: random.Random, T: int, max_len=2, beta=None):
    """A random nonempty semi-ring cylinder."""
    for _ in range(200):
        if beta is None:
            ws = [()] + words(ug, T, max_len)
            b = rng.choice(ws)
        else:
            b = beta
        R = ug.range(b[-1]) if b else ug.all_vertices()
        choices = _bases(ug, R, T)
        if not choices:
            continue
        B = rng.choice(choices)
        F, S = (), ()
        if ug.is_minimal(B):
            eps = [e for e in ug.edges_upto(T) if ug.source(e) in B]
            F = tuple(rng.sample(eps, rng.randint(0, min(2, len(eps)))))
            sinks = [v for v in ug.vertices_upto(T) if v in B and ug.is_sink(v)]
            S = tuple(rng.sample(sinks, rng.randint(0, min(2, len(sinks)))))
        c = bd.cylinder(ug, b, B, F, S)
        if bd.in_semiring(ug, c) and not bd.is_empty(ug, c):
            return c
    return None


def random_cylinder_after(ug, rng: random.Random, T: int, e, max_len=2):
    """A random semi-ring cylinder inside the domain of the prefix map by e:
    its points start in r(e)."""
    R = ug.range(e)
    ws = [w for w in words(ug, T, max_len) if ug.source(w[0]) in R]
    for _ in range(100):
        b = rng.choice([()] + ws)
        if b:
            c = random_semiring_cylinder(ug, rng, T, beta=b)
        else:
            choices = _bases(ug, R, T)
            if not choices:
                continue
            B = rng.choice(choices)
            c = bd.cylinder(ug, (), B)
            if not bd.in_semiring(ug, c):
                continue
        if c is not None and not bd.is_empty(ug, c):
            return c
    return None


def random_nested_pair(ug, rng: random.Random, T: int, points):
    """Semi-ring cylinders C0 inside C, nestedness decided by the oracle."""
    for _ in range(200):
        C = random_semiring_cylinder(ug, rng, T)
        if C is None:
            continue
        mode = rng.randrange(3)
        if mode == 0 and ug.is_minimal(C.B):
            eps = [e for e in ug.edges_upto(T) if ug.source(e) in C.B]
            sinks = [v for v in ug.vertices_upto(T) if v in C.B and ug.is_sink(v)]
            F = set(C.F) | set(rng.sample(eps, min(len(eps), rng.randint(0, 2))))
            S = set(C.S) | set(rng.sample(sinks, min(len(sinks), rng.randint(0, 2))))
            C0 = bd.cylinder(ug, C.beta, C.B, F, S)
        elif mode == 1:
            C0 = random_semiring_cylinder(ug, rng, T, beta=C.beta)
        else:
            eps = [e for e in ug.edges_upto(T) if ug.source(e) in C.B and e not in C.F]
            if not eps:
                continue
            C0 = random_semiring_cylinder(ug, rng, T, beta=C.beta + (rng.choice(eps),))
        if C0 is None or bd.is_empty(ug, C0) or not bd.in_semiring(ug, C0):
            continue
        inside = oracle_set(ug, [C0], points)
        outer = oracle_set(ug, [C], points)
        if inside and inside <= outer:
            return C, C0
    return None


def random_graph(rng: random.Random, n_vertices: int, n_edges: int):
    verts = [f"v{i}" for i in range(n_vertices)]
    edges = [(rng.choice(verts), rng.choice(verts)) for _ in range(n_edges)]
    return edges, verts


# ------------------------------------------------------- dichotomy oracle

def window(ug):
    return ug.max_explicit_index() + 2


def tail_count(ug, A, lo, hi):
    """Members of A with family index in [lo, hi]."""
    return sum(1 for r in A.enumerate_upto(hi) if not isinstance(r, str) and r[1] >= lo)


def infinite_by_count(ug, A):
    # atoms mention indices up to window(ug); past that a set is either empty
    # or a full family tail
    K = window(ug) + 1
    return tail_count(ug, A, K, K + 10) > 0


def emits_infinitely_by_count(ug, A):
    K = window(ug)
    small = sum(1 for e in ug.edges_upto(K + 5) if ug.source(e) in A)
    large = sum(1 for e in ug.edges_upto(K + 15) if ug.source(e) in A)
    return large > small


def atoms(ug):
    """Generalized vertices built from the generators, plus one round of
    unions and nonempty intersections."""
    T = window(ug)
    base = [ug.range(e) for e in ug.edges_upto(T)]
    base += [ug.singleton(v) for v in ug.vertices_upto(T)]
    base += [c.set for c in ug.infinite_cells()]
    base = list(dict.fromkeys(base))
    out = list(base)
    for a, b in itertools.combinations(base, 2):
        out.append(a.union(b))
        i = a.intersect(b)
        if not i.is_empty():
            out.append(i)
    return list(dict.fromkeys(out))


def minimal_emitters(ug):
    out = [c.set for c in ug.minimal_cells() if ug.is_minimal_infinite_emitter(c.set)]
    out += [ug.singleton(u) for u in ug.infinite_emitter_vertices()]
    return out


# ------------------------------------------------------------ KMS helpers

def kms_points(ug, beta, T, count, seed):
    """Several exact points of the KMS polytope: lexicographic minima
    under random variable orders."""
    system = kms.build_constraints(ug, beta, T)
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        order = list(system.variables)
        rng.shuffle(order)
        res = kms.linsolve.solve(order, system.constraints, dimension=False)
        if isinstance(res, kms.Infeasible):
            return system, []
        out.append(res.assignment)
    return system, out


def mix(a: dict, b: dict, lam: Fraction) -> dict:
    return {k: lam * a[k] + (1 - lam) * b[k] for k in a}
