"""Exact linear feasibility over the rationals.

Equalities are eliminated by Gaussian elimination; the remaining
inequalities over the free variables are handled by Fourier-Motzkin
projection.  Everything is computed with ``fractions.Fraction``.

A constraint ``Constraint(coeffs, op, rhs)`` reads
``sum(coeffs[v] * v) op rhs`` with ``op`` one of ``"=="`` or ``">="``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Tuple

MAX_FREE = 40


class SizeLimit(ValueError):
    pass


class Unbounded(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    coeffs: Tuple[Tuple[str, Fraction], ...]
    op: str
    rhs: Fraction
    tag: tuple = ()

    @staticmethod
    def make(coeffs: Dict[str, Fraction], op: str, rhs, tag=()) -> "Constraint":
        if op not in ("==", ">="):
            raise ValueError(f"bad operator {op}")
        items = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c != 0))
        return Constraint(items, op, Fraction(rhs), tuple(tag))

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.coeffs)

    def residual(self, x: Dict[str, Fraction]):
        """lhs - rhs at the point x."""
        return sum((c * x.get(v, 0) for v, c in self.coeffs), Fraction(0)) - self.rhs

    def holds(self, x, tol=0) -> bool:
        r = self.residual(x)
        if self.op == "==":
            return abs(r) <= tol
        return r >= -tol


@dataclass(frozen=True)
class Infeasible:
    reason: str


@dataclass(frozen=True)
class Solution:
    assignment: Dict[str, Fraction]
    dimension: int
    free_variables: int = 0
    implicit_equalities: Tuple[int, ...] = field(default=())


# An inequality over index space: (coefficient tuple, rhs) meaning a.x >= rhs.
Row = Tuple[Tuple[Fraction, ...], Fraction]


def rref(rows: List[List[Fraction]], ncols: int):
    """Reduced row echelon form of an augmented matrix (last column = rhs).

    Returns (rows, pivots) or None when the system is inconsistent.
    """
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    for row in rows[r:]:
        if row[-1] != 0:
            return None
    return rows[:r], pivots


def rank(vectors: List[Tuple[Fraction, ...]]) -> int:
    if not vectors:
        return 0
    n = len(vectors[0])
    out = rref([list(v) + [Fraction(0)] for v in vectors], n)
    return len(out[1])


def _integral(row: Row) -> Tuple[Tuple[int, ...], int]:
    """Scale a rational row to coprime integers (same inequality)."""
    a, b = row
    den = 1
    for x in a + (b,):
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in a] + [int(b * den)]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints[:-1]), ints[-1]


def _reduce(a: Tuple[int, ...], b):
    """Divide by the gcd of the coefficients so parallel rows share a key.

    The rhs may become a Fraction; the variables are rational, so it is not
    rounded."""
    g = 0
    for x in a:
        g = gcd(g, x)
    if g == 0:
        return a, (1 if b > 0 else 0)
    if g > 1:
        return tuple(x // g for x in a), Fraction(b, g)
    return a, b


def _dedupe(rows):
    best = {}
    for a, b in rows:
        a, b = _reduce(a, b)
        if a in best:
            best[a] = max(best[a], b)
        else:
            best[a] = b
    return [(a, best[a]) for a in sorted(best)]


def _eliminate(rows, j: int):
    pos = [r for r in rows if r[0][j] > 0]
    neg = [r for r in rows if r[0][j] < 0]
    out = [r for r in rows if r[0][j] == 0]
    for ap, bp in pos:
        for an, bn in neg:
            fp, fn = -an[j], ap[j]
            a = tuple(fp * x + fn * y for x, y in zip(ap, an))
            out.append((a, fp * bp + fn * bn))
    return _dedupe(out)


def _trivially_infeasible(rows) -> bool:
    return any(b > 0 and not any(a) for a, b in rows)


def project_bounds(rows: List[Row], keep: int, n: int):
    """Eliminate every coordinate except ``keep``.

    Returns (lower, upper) bounds on the kept coordinate (None when
    unbounded) or None when the system is infeasible.
    """
    rows = _dedupe([_integral(r) for r in rows])
    todo = [j for j in range(n) if j != keep]
    while todo:
        def cost(j):
            p = sum(1 for a, _ in rows if a[j] > 0)
            q = sum(1 for a, _ in rows if a[j] < 0)
            return (p * q - p - q, j)
        j = min(todo, key=cost)
        todo.remove(j)
        rows = _eliminate(rows, j)
        if _trivially_infeasible(rows):
            return None
    lo, hi = None, None
    for a, b in rows:
        c = a[keep]
        if c > 0:
            v = Fraction(b) / c
            lo = v if lo is None else max(lo, v)
        elif c < 0:
            v = Fraction(b) / c
            hi = v if hi is None else min(hi, v)
        elif b > 0:
            return None
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def _minimize(rows: List[Row], obj: Tuple[Fraction, ...], const: Fraction, n: int):
    """min obj.x + const over {a.x >= b}; returns value, None if infeasible.

    Raises Unbounded when the objective has no lower bound.
    """
    # add t as coordinate n with t = obj.x
    ext = [(a + (Fraction(0),), b) for a, b in rows]
    ext.append((tuple(-x for x in obj) + (Fraction(1),), Fraction(0)))
    ext.append((tuple(obj) + (Fraction(-1),), Fraction(0)))
    res = project_bounds(ext, n, n + 1)
    if res is None:
        return None
    lo, _ = res
    if lo is None:
        raise Unbounded("objective is unbounded below")
    return lo + const


class _Reduced:
    """The system rewritten over the free variables of its equalities."""

    def __init__(self, variables: List[str], eqs: List[Constraint], ineqs: List[Constraint]):
        self.variables = variables
        idx = {v: i for i, v in enumerate(variables)}
        n = len(variables)
        rows = []
        for c in eqs:
            row = [Fraction(0)] * (n + 1)
            for v, a in c.coeffs:
                row[idx[v]] += a
            row[n] = c.rhs
            rows.append(row)
        red = rref(rows, n)
        self.ok = red is not None
        if not self.ok:
            return
        rows, pivots = red
        self.free = [j for j in range(n) if j not in pivots]
        fpos = {j: k for k, j in enumerate(self.free)}
        m = len(self.free)
        # each variable as an affine form (coefficients over free vars, constant)
        self.forms = {}
        for j in self.free:
            a = [Fraction(0)] * m
            a[fpos[j]] = Fraction(1)
            self.forms[j] = (tuple(a), Fraction(0))
        for r, j in zip(rows, pivots):
            a = [Fraction(0)] * m
            for jj in self.free:
                a[fpos[jj]] = -r[jj]
            self.forms[j] = (tuple(a), r[n])
        self.rows: List[Row] = []
        for c in ineqs:
            a = [Fraction(0)] * m
            const = Fraction(0)
            for v, coef in c.coeffs:
                fa, fc = self.forms[idx[v]]
                a = [x + coef * y for x, y in zip(a, fa)]
                const += coef * fc
            self.rows.append((tuple(a), c.rhs - const))

    def value(self, j: int, point: Tuple[Fraction, ...]) -> Fraction:
        a, c = self.forms[j]
        return sum((x * y for x, y in zip(a, point)), c)


def _split(constraints):
    eqs = [c for c in constraints if c.op == "=="]
    ineqs = [c for c in constraints if c.op == ">="]
    return eqs, ineqs


def solve(variables: List[str], constraints: List[Constraint], dimension: bool = True):
    """Lexicographically least feasible point (in the given variable order)
    and the affine dimension of the feasible set, or Infeasible.

    With ``dimension=False`` the dimension search is skipped and reported
    as -1."""
    variables = list(variables)
    eqs, ineqs = _split(constraints)
    base = _Reduced(variables, eqs, ineqs)
    if not base.ok:
        return Infeasible("the equalities are inconsistent")
    if len(base.free) > MAX_FREE:
        raise SizeLimit(f"{len(base.free)} free variables exceed the limit of {MAX_FREE}")
    m = len(base.free)
    if _trivially_infeasible(base.rows):
        return Infeasible("an inequality without variables fails")
    if m == 0:
        if any(b > 0 for _, b in base.rows):
            return Infeasible("the unique solution of the equalities violates an inequality")
        point = ()
    else:
        if project_bounds(base.rows, 0, m) is None:
            return Infeasible("Fourier-Motzkin projection is empty")
        fixed = list(eqs)
        for j, v in enumerate(variables):
            red = _Reduced(variables, fixed, ineqs)
            if not red.free:
                break
            a, c = red.forms[j]
            if all(x == 0 for x in a):
                continue
            best = _minimize(red.rows, a, c, len(red.free))
            if best is None:
                return Infeasible("Fourier-Motzkin projection is empty")
            fixed.append(Constraint.make({v: 1}, "==", best))
        red = _Reduced(variables, fixed, ineqs)
        if not red.ok or red.free:
            raise AssertionError("lexicographic search did not pin every variable")
        assignment = {v: red.forms[j][1] for j, v in enumerate(variables)}
        point = tuple(assignment[variables[j]] for j in base.free)
    assignment = {v: base.value(j, point) for j, v in enumerate(variables)}
    if not dimension:
        return Solution(assignment, -1, m)

    # implicit equalities: inequalities tight everywhere on the feasible set
    implicit = []
    for i, (a, b) in enumerate(base.rows):
        if all(x == 0 for x in a):
            continue
        if sum((x * y for x, y in zip(a, point)), Fraction(0)) != b:
            continue
        try:
            top = _minimize(base.rows, tuple(-x for x in a), Fraction(0), m)
        except Unbounded:
            continue
        if top is not None and -top == b:
            implicit.append(i)
    r = rank([base.rows[i][0] for i in implicit])
    return Solution(assignment, m - r, m, tuple(implicit))


def extent(variables: List[str], constraints: List[Constraint], var: str):
    """(min, max) of one variable over the feasible set; None for an
    unbounded side.  Returns None when the system is infeasible."""
    variables = list(variables)
    eqs, ineqs = _split(constraints)
    red = _Reduced(variables, eqs, ineqs)
    if not red.ok:
        return None
    a, c = red.forms[variables.index(var)]
    m = len(red.free)
    if m == 0 or all(x == 0 for x in a):
        if m and project_bounds(red.rows, 0, m) is None:
            return None
        if not m and any(b > 0 for _, b in red.rows):
            return None
        return c, c
    try:
        lo = _minimize(red.rows, a, c, m)
    except Unbounded:
        lo = None
    try:
        hi = _minimize(red.rows, tuple(-x for x in a), -c, m)
        hi = None if hi is None else -hi
    except Unbounded:
        hi = None
    return lo, hi


def check(constraints: List[Constraint], x: Dict[str, Fraction], tol=0) -> List[Constraint]:
    """Constraints violated by x."""
    return [c for c in constraints if not c.holds(x, tol)]
