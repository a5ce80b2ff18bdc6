"""KMS and ground state data: the m1-m4 constraint compiler, the exact
solver front end, the cylinder measure kappa and beta sweeps.

Unknowns are finitely many.  Up to a truncation index T every vertex has
its own value m(v).  Each infinite minimal set A carries a residual
t(A) >= 0 with m(A) = sum of m(v) over its vertices of index <= T plus
t(A).  A family of sinks that lies outside every minimal set and is not
hit by family ranges carries one tail variable for the total mass of its
vertices beyond T.  Every other vertex beyond T is given the value 0.
Values on the rest of the generalized vertices follow from the unique
decomposition and inclusion-exclusion, so m4 holds by construction.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Optional, Union

from . import linsolve
from .boundary import Cylinder, disjointify, in_semiring
from .linsolve import Constraint, Infeasible, SizeLimit
from .setexpr import format_set, parse_set
from .symsets import SymbolicSet, format_ref, ref_key
from .ultragraph import Ultragraph

__all__ = [
    "ConstraintSystem", "KmsSolution", "MFunction", "NegativeMass", "KmsError",
    "build_constraints", "solve_kms", "solve_ground", "kappa", "mu", "verify_m",
    "beta_sweep", "edge_factor", "Infeasible", "SizeLimit",
]

PRECISION = 50


class KmsError(ValueError):
    pass


class NegativeMass(ValueError):
    pass


# ------------------------------------------------------------------ weights

def _int_root(n: int, q: int) -> Optional[int]:
    if n < 0:
        return None
    r = round(n ** (1.0 / q)) if n else 0
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** q == n:
            return c
    return None


def power(N: Fraction, beta: Fraction):
    """N ** (-beta) as (value, exact)."""
    N, beta = Fraction(N), Fraction(beta)
    if beta.denominator == 1:
        return N ** (-beta.numerator), True
    q = beta.denominator
    a, b = _int_root(N.numerator, q), _int_root(N.denominator, q)
    if a is not None and b is not None:
        return Fraction(a, b) ** (-beta.numerator), True
    with localcontext() as ctx:
        ctx.prec = PRECISION
        d = (Decimal(N.numerator) / Decimal(N.denominator)).ln()
        d = (-(Decimal(beta.numerator) / Decimal(beta.denominator)) * d).exp()
    return Fraction(d), False


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


def edge_factor(ug: Ultragraph, e, beta, cache=None):
    """M(e) = N(e) ** (-beta) with an exactness flag."""
    beta = as_fraction(beta)
    if beta == 0:
        return Fraction(1), True
    N = ug.weight_of(e)
    if N is None:
        raise KmsError(f"no weight N given for edge {format_ref(e)}")
    key = (N, beta)
    if cache is not None and key in cache:
        return cache[key]
    out = power(N, beta)
    if cache is not None:
        cache[key] = out
    return out


# ---------------------------------------------------------------- variables

def vname(v) -> str:
    return f"m({format_ref(v)})"


def tname(A: SymbolicSet) -> str:
    return f"t({format_set(A)})"


def tailname(fam: str) -> str:
    return f"tail({fam})"


class Layout:
    """The finite set of unknowns for one ultragraph and truncation."""

    def __init__(self, ug: Ultragraph, truncation: Optional[int] = None):
        if truncation is None:
            truncation = ug.default_truncation()
        if truncation < ug.max_explicit_index():
            raise KmsError(f"truncation {truncation} is below the largest explicit index "
                           f"{ug.max_explicit_index()}")
        self.ug = ug
        self.T = truncation
        self.heads = ug.vertices_upto(truncation)
        self.head_set = set(self.heads)
        self.cells = [c.set for c in ug.minimal_cells()]
        self.tails = self._tail_families()
        self.variables = ([vname(v) for v in self.heads] + [tname(c) for c in self.cells]
                          + [tailname(f) for f in self.tails])

    def _tail_families(self) -> List[str]:
        ug = self.ug
        covered = SymbolicSet()
        for c in self.cells:
            covered = covered.union(c)
        hit = {g for f in ug.edge_families.values() for g, _ in (f.range_refs or ())}
        out = []
        for fam in sorted(ug.vertex_families):
            rest = ug.family_set(fam).difference(covered).intersect(ug.sinks())
            if not rest.is_finite() and fam not in hit:
                out.append(fam)
        return out

    def vertex_form(self, v) -> Dict[str, Fraction]:
        if v in self.head_set:
            return {vname(v): Fraction(1)}
        return {}

    def cell_form(self, C: SymbolicSet) -> Dict[str, Fraction]:
        form = {vname(v): Fraction(1) for v in C.enumerate_upto(self.T)}
        form[tname(C)] = Fraction(1)
        return form

    def set_form(self, A: SymbolicSet) -> Dict[str, Fraction]:
        """m(A) as a linear form in the unknowns."""
        dec = self.ug.decompose(A)
        form: Dict[str, Fraction] = defaultdict(Fraction)
        cells = [g for g in dec.minimal_parts if not g.is_finite()]
        singles = [g for g in dec.minimal_parts if g.is_finite()]
        for C in cells:
            for k, c in self.cell_form(C).items():
                form[k] += c
        # inclusion-exclusion: cells meet in finite sets of head vertices
        mult: Dict = defaultdict(int)
        for C in cells:
            for v in C.enumerate_upto(self.T):
                mult[v] += 1
        for v, n in mult.items():
            if n > 1:
                for k, c in self.vertex_form(v).items():
                    form[k] -= (n - 1) * c
        for S in singles:
            for v in S:
                for k, c in self.vertex_form(v).items():
                    form[k] += c
        for v in dec.finite_part:
            for k, c in self.vertex_form(v).items():
                form[k] += c
        return {k: c for k, c in form.items() if c != 0}

    def top(self) -> SymbolicSet:
        out = self.ug.vset(self.heads)
        for c in self.cells:
            out = out.union(c)
        return out


def _add(form, other, scale=Fraction(1)):
    for k, c in other.items():
        form[k] = form.get(k, Fraction(0)) + scale * c


# ---------------------------------------------------------------- compiler

@dataclass
class ConstraintSystem:
    ug: Ultragraph
    layout: Layout
    beta: Optional[Fraction]
    variables: List[str]
    constraints: List[Constraint]
    exact: bool = True
    attained: bool = True
    mode: str = "kms"

    def by_condition(self, cond: str) -> List[Constraint]:
        return [c for c in self.constraints if c.tag and c.tag[0] == cond]


def _dedupe(constraints: List[Constraint]) -> List[Constraint]:
    seen = set()
    out = []
    for c in constraints:
        if not c.coeffs:
            if c.op == "==" and c.rhs == 0 or c.op == ">=" and c.rhs <= 0:
                continue
        lead = c.coeffs[0][1] if c.coeffs else Fraction(1)
        s = abs(lead)
        key = (tuple((v, a / s) for v, a in c.coeffs), c.op, c.rhs / s)
        if c.op == "==" and lead < 0:
            key = (tuple((v, -a / s) for v, a in c.coeffs), c.op, -c.rhs / s)
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
    return out


def _family_window(ug: Ultragraph) -> int:
    k = 1
    for f in ug.edge_families.values():
        k = max(k, abs(f.source_offset) + 1)
        for _, off in f.range_refs or ():
            k = max(k, abs(off) + abs(f.source_offset) + 1)
    return k


def build_constraints(ug: Ultragraph, beta=1, truncation: Optional[int] = None,
                      mode: str = "kms") -> ConstraintSystem:
    """Compile m1-m3 for inverse temperature ``beta``.

    ``mode`` is ``"kms"``, ``"ground"`` (every finite set with finite
    emission gets mass 0, sinks included) or ``"ground-edge-zero"`` (the
    KMS system with every factor M(e) set to 0, so only sinks and minimal
    sets carry mass).
    """
    if mode not in ("kms", "ground", "ground-edge-zero"):
        raise KmsError(f"unknown mode {mode}")
    rf = ug.check_rfum2()
    if not rf.holds:
        from .ultragraph import NotRfum2
        raise NotRfum2(f"the range of {rf.counterexample} is not a finite union of minimal "
                       f"sets and singletons", residue=rf.residue, edge=rf.counterexample)
    L = Layout(ug, truncation)
    beta = None if mode != "kms" else as_fraction(beta)
    if beta is not None and beta < 0:
        raise KmsError("beta must be >= 0")
    cache = {}
    exact = True

    def M(e):
        nonlocal exact
        if mode != "kms":
            return Fraction(0)
        val, ok = edge_factor(ug, e, beta, cache)
        exact = exact and ok
        return val

    cons: List[Constraint] = []
    for v in L.variables:
        cons.append(Constraint.make({v: 1}, ">=", 0, ("bound", v)))

    # m1
    top = L.set_form(L.top())
    for f in L.tails:
        top[tailname(f)] = Fraction(1)
    cons.append(Constraint.make(top, "==", 1, ("m1", "top")))

    # m2 on heads (per vertex; m4 extends it to finite sets)
    sinks = ug.sinks()
    infinite = set(ug.infinite_emitter_vertices())
    for v in L.heads:
        if v in infinite:
            continue
        if mode == "ground":
            cons.append(Constraint.make(L.vertex_form(v), "==", 0, ("m2", f"{{{format_ref(v)}}}")))
            continue
        if v in sinks:
            continue
        form = dict(L.vertex_form(v))
        for e in ug.out_edges(v):
            _add(form, L.set_form(ug.range(e)), -M(e))
        cons.append(Constraint.make(form, "==", 0, ("m2", f"{{{format_ref(v)}}}")))

    # m2 just beyond the truncation, where vertex values are 0
    window = _family_window(ug)
    for fam in sorted(ug.vertex_families):
        for i in range(L.T + 1, L.T + window + 1):
            v = (fam, i)
            if v in infinite or v in sinks:
                continue
            form = {}
            for e in ug.out_edges(v):
                _add(form, L.set_form(ug.range(e)), M(e))
            if form:
                cons.append(Constraint.make(form, "==", 0, ("m2", f"{{{format_ref(v)}}}")))
    if mode == "ground":
        for f in L.tails:
            cons.append(Constraint.make({tailname(f): 1}, "==", 0, ("m2", f"tail {f}")))

    # m3
    for C in L.cells:
        cons.append(Constraint.make({tname(C): 1}, ">=", 0, ("m3", format_set(C))))
    for u in ug.infinite_emitter_vertices():
        form = dict(L.vertex_form(u))
        for e in sorted(ug.edges):
            if ug.edges[e].source == u:
                _add(form, L.set_form(ug.range(e)), -M(e))
        for f in sorted(ug.edge_families):
            fam = ug.edge_families[f]
            if fam.source_const != u:
                continue
            for i in range(fam.base, L.T + 1):
                _add(form, L.set_form(ug.range((f, i))), -M((f, i)))
            if fam.range_const is not None and mode == "kms":
                # infinitely many copies of the same range must carry no mass
                neg = {k: -c for k, c in L.set_form(fam.range_const).items()}
                cons.append(Constraint.make(neg, ">=", 0, ("m3", f"{{{format_ref(u)}}}")))
        cons.append(Constraint.make(form, ">=", 0, ("m3", f"{{{format_ref(u)}}}")))

    return ConstraintSystem(ug, L, beta, list(L.variables), _dedupe(cons), exact,
                            attained=not L.tails, mode=mode)


# ------------------------------------------------------------------ solving

@dataclass
class MFunction:
    """Values of the unknowns, with evaluation on generalized vertices."""

    ug: Ultragraph
    truncation: int
    values: Dict[str, Fraction]
    layout: Layout = field(init=False, repr=False)

    def __post_init__(self):
        self.layout = Layout(self.ug, self.truncation)
        known = set(self.layout.variables)
        for k in self.values:
            if k not in known:
                raise KmsError(f"unknown variable {k}")
        self.values = {k: Fraction(self.values.get(k, 0)) for k in self.layout.variables}

    def __call__(self, A) -> Fraction:
        if not isinstance(A, SymbolicSet):
            A = self.ug.singleton(A)
        form = self.layout.set_form(A)
        return sum((c * self.values[k] for k, c in form.items()), Fraction(0))

    def vertex(self, v) -> Fraction:
        return self(self.ug.singleton(v))


@dataclass
class KmsSolution:
    m: MFunction
    dimension: int
    exact: bool
    attained: bool

    @property
    def assignment(self):
        return self.m.values


def solve_kms(system: ConstraintSystem):
    """Lexicographically least solution and the dimension of the solution set."""
    res = linsolve.solve(system.variables, system.constraints)
    if isinstance(res, Infeasible):
        return res
    m = MFunction(system.ug, system.layout.T, res.assignment)
    return KmsSolution(m, res.dimension, system.exact, system.attained)


def solve(ug: Ultragraph, beta=1, truncation: Optional[int] = None):
    return solve_kms(build_constraints(ug, beta, truncation))


def solve_ground(ug: Ultragraph, truncation: Optional[int] = None, variant: str = "finite-regular"):
    """Ground state data.

    ``variant="finite-regular"`` gives mass 0 to every finite set with finite
    emission; ``variant="edge-zero"`` only forces regular vertices to 0.
    """
    mode = {"finite-regular": "ground", "edge-zero": "ground-edge-zero"}.get(variant)
    if mode is None:
        raise KmsError(f"unknown ground variant {variant}")
    return solve_kms(build_constraints(ug, None, truncation, mode=mode))


def forced_values(system: ConstraintSystem) -> Dict[str, Optional[Fraction]]:
    """For each unknown, its value when the constraints force it, else None."""
    out = {}
    for v in system.variables:
        lo, hi = linsolve.extent(system.variables, system.constraints, v)
        out[v] = lo if lo is not None and lo == hi else None
    return out


# ------------------------------------------------------------------ measure

def _M_word(ug, beta, word, cache):
    val, exact = Fraction(1), True
    for e in word:
        x, ok = edge_factor(ug, e, beta, cache)
        val *= x
        exact = exact and ok
    return val


def kappa(ug: Ultragraph, c: Cylinder, m: MFunction, beta, tol=0) -> Fraction:
    """kappa(D_{(beta,B),F,S}) = M(beta) (m(B) - sum_F M(e) m(r(e)) - sum_S m(v))."""
    if not in_semiring(ug, c):
        raise KmsError(f"{c} is not in the semi-ring")
    cache = {}
    inner = m(c.B)
    for e in sorted(c.F, key=ref_key):
        inner -= _M_word(ug, beta, (e,), cache) * m(ug.range(e))
    for v in sorted(c.S, key=ref_key):
        inner -= m.vertex(v)
    val = _M_word(ug, beta, c.beta, cache) * inner
    if val < -as_fraction(tol):
        raise NegativeMass(f"kappa({c}) = {val} < 0; m violates m3")
    return val


def mu(ug: Ultragraph, region: List[Cylinder], m: MFunction, beta, tol=0) -> Fraction:
    """Measure of a finite union of cylinders."""
    return sum((kappa(ug, p, m, beta, tol) for p in disjointify(ug, region)), Fraction(0))


# --------------------------------------------------------------- verifying

def m_from_document(ug: Ultragraph, data: Union[str, dict]) -> MFunction:
    """Read an m file::

        {"truncation": 20,
         "vertices": {"v0": "1/3", "V[1]": "1/3", ...},
         "minimal": [{"set": "FAMILY(V)", "value": "2/3"}],
         "family_tails": {"F": "0"}}

    A minimal entry gives either the total ``value`` m(A) or the residual
    ``tail`` beyond the listed vertices.
    """
    from .setexpr import parse_ref
    if isinstance(data, str):
        data = json.loads(data)
    T = data.get("truncation", ug.default_truncation())
    L = Layout(ug, T)
    vals = {}
    for k, x in (data.get("vertices") or {}).items():
        v = parse_ref(k)
        if v not in L.head_set:
            raise KmsError(f"vertex {k} is not a head vertex at truncation {T}")
        vals[vname(v)] = as_fraction(x)
    cells = {c: i for i, c in enumerate(L.cells)}
    for entry in data.get("minimal") or []:
        A = parse_set(entry["set"], ug.vertex_families, ug.range)
        if A not in cells:
            raise KmsError(f"{entry['set']} is not an infinite minimal set")
        if "tail" in entry:
            vals[tname(A)] = as_fraction(entry["tail"])
        elif "value" in entry:
            heads = sum((vals.get(vname(v), Fraction(0)) for v in A.enumerate_upto(T)), Fraction(0))
            vals[tname(A)] = as_fraction(entry["value"]) - heads
        else:
            raise KmsError("minimal entries need a value or a tail")
    for f, x in (data.get("family_tails") or {}).items():
        vals[tailname(f)] = as_fraction(x)
    return MFunction(ug, T, vals)


def verify_m(ug: Ultragraph, m: MFunction, beta=1, tol=0, mode: str = "kms") -> List[dict]:
    """Violated constraints: each as {condition, set, residual}."""
    tol = as_fraction(tol)
    system = build_constraints(ug, beta, m.truncation, mode=mode)
    out = []
    for c in system.constraints:
        if not c.holds(m.values, tol):
            out.append({"condition": c.tag[0], "set": c.tag[1], "residual": c.residual(m.values)})
    for k, x in sorted(m.values.items()):
        if x > 1 + tol:
            out.append({"condition": "range", "set": k, "residual": x - 1})
    return out


# -------------------------------------------------------------------- sweep

def beta_sweep(ug: Ultragraph, betas, truncation: Optional[int] = None) -> List[dict]:
    rows = []
    for b in sorted(as_fraction(x) for x in betas):
        res = solve(ug, b, truncation)
        if isinstance(res, Infeasible):
            rows.append({"beta": b, "feasible": False, "dimension": None, "reason": res.reason})
        else:
            rows.append({"beta": b, "feasible": True, "dimension": res.dimension,
                         "exact": res.exact})
    return rows
