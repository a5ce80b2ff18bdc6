"""Finite presentations of possibly infinite sets of vertices or edges.

A set is a finite collection of named elements plus, for each indexed
family, either a finite set of indices or a cofinite slice (every index
from the family base upward except finitely many exclusions).  The class
is used for vertex sets and for edge sets alike; refs are plain strings
for named elements and ``(family, index)`` tuples for indexed ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import Iterable, Iterator, Optional, Tuple, Union

Ref = Union[str, Tuple[str, int]]


class DeclarationError(ValueError):
    """Two sets disagree on how a family is declared."""


def ref_key(ref: Ref):
    """Canonical order: named refs first, then by family id and index."""
    if isinstance(ref, str):
        return (0, ref, "", 0)
    return (1, "", ref[0], ref[1])


def format_ref(ref: Ref) -> str:
    if isinstance(ref, str):
        return ref
    return f"{ref[0]}[{ref[1]}]"


@dataclass(frozen=True)
class FamilyPart:
    family: str
    base: int
    cofinite: bool
    indices: frozenset  # members when finite, exclusions when cofinite

    def contains(self, index: int) -> bool:
        if index < self.base:
            return False
        return (index not in self.indices) if self.cofinite else (index in self.indices)

    def key(self):
        return (self.family, self.base, self.cofinite, tuple(sorted(self.indices)))


def _make_part(family, base, cofinite, indices) -> Optional[FamilyPart]:
    indices = frozenset(indices)
    if cofinite:
        indices = frozenset(i for i in indices if i >= base)
    else:
        low = [i for i in indices if i < base]
        if low:
            raise DeclarationError(
                f"index {min(low)} is below the base {base} of family {family}")
        if not indices:
            return None
    return FamilyPart(family, base, cofinite, indices)


def _combine(a: Optional[FamilyPart], b: Optional[FamilyPart], op: str) -> Optional[FamilyPart]:
    if a is None and b is None:
        return None
    if a is not None and b is not None and a.base != b.base:
        raise DeclarationError(
            f"family {a.family} declared with base {a.base} and with base {b.base}")
    ref = a if a is not None else b
    fam, base = ref.family, ref.base
    empty = FamilyPart(fam, base, False, frozenset())
    a = a or empty
    b = b or empty
    x, y = a.indices, b.indices
    if op == "union":
        if a.cofinite and b.cofinite:
            return _make_part(fam, base, True, x & y)
        if a.cofinite:
            return _make_part(fam, base, True, x - y)
        if b.cofinite:
            return _make_part(fam, base, True, y - x)
        return _make_part(fam, base, False, x | y)
    if op == "inter":
        if a.cofinite and b.cofinite:
            return _make_part(fam, base, True, x | y)
        if a.cofinite:
            return _make_part(fam, base, False, y - x)
        if b.cofinite:
            return _make_part(fam, base, False, x - y)
        return _make_part(fam, base, False, x & y)
    # difference a \ b
    if a.cofinite and b.cofinite:
        return _make_part(fam, base, False, y - x)
    if a.cofinite:
        return _make_part(fam, base, True, x | y)
    if b.cofinite:
        return _make_part(fam, base, False, x & y)
    return _make_part(fam, base, False, x - y)


@dataclass(frozen=True)
class SymbolicSet:
    named: frozenset = frozenset()
    parts: tuple = ()  # FamilyPart values sorted by family id

    # construction helpers

    @staticmethod
    def empty() -> "SymbolicSet":
        return SymbolicSet()

    @staticmethod
    def of(refs: Iterable[Ref], bases: dict) -> "SymbolicSet":
        """Finite set from refs; ``bases`` maps family id to its base index."""
        named = set()
        fam = {}
        for r in refs:
            if isinstance(r, str):
                named.add(r)
            else:
                if r[0] not in bases:
                    raise DeclarationError(f"unknown family {r[0]}")
                fam.setdefault(r[0], set()).add(r[1])
        parts = []
        for f in sorted(fam):
            p = _make_part(f, bases[f], False, fam[f])
            if p is not None:
                parts.append(p)
        return SymbolicSet(frozenset(named), tuple(parts))

    @staticmethod
    def cofinite(family: str, base: int, excluded: Iterable[int] = ()) -> "SymbolicSet":
        return SymbolicSet(frozenset(), (_make_part(family, base, True, excluded),))

    @staticmethod
    def finite_family(family: str, base: int, indices: Iterable[int]) -> "SymbolicSet":
        p = _make_part(family, base, False, indices)
        return SymbolicSet(frozenset(), (p,) if p else ())

    # algebra

    def _apply(self, other: "SymbolicSet", op: str) -> "SymbolicSet":
        mine = {p.family: p for p in self.parts}
        theirs = {p.family: p for p in other.parts}
        parts = []
        for fam in sorted(set(mine) | set(theirs)):
            p = _combine(mine.get(fam), theirs.get(fam), op)
            if p is not None:
                parts.append(p)
        if op == "union":
            named = self.named | other.named
        elif op == "inter":
            named = self.named & other.named
        else:
            named = self.named - other.named
        return SymbolicSet(frozenset(named), tuple(parts))

    def union(self, other: "SymbolicSet") -> "SymbolicSet":
        return self._apply(other, "union")

    def intersect(self, other: "SymbolicSet") -> "SymbolicSet":
        return self._apply(other, "inter")

    def difference(self, other: "SymbolicSet") -> "SymbolicSet":
        return self._apply(other, "diff")

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def is_subset(self, other: "SymbolicSet") -> bool:
        return self.difference(other).is_empty()

    def is_empty(self) -> bool:
        return not self.named and not self.parts

    def __contains__(self, ref: Ref) -> bool:
        if isinstance(ref, str):
            return ref in self.named
        for p in self.parts:
            if p.family == ref[0]:
                return p.contains(ref[1])
        return False

    def is_member(self, ref: Ref) -> bool:
        return ref in self

    # size and listing

    def is_finite(self) -> bool:
        return not any(p.cofinite for p in self.parts)

    def cardinality(self) -> Optional[int]:
        """Number of elements, or None when the set is infinite."""
        if not self.is_finite():
            return None
        return len(self.named) + sum(len(p.indices) for p in self.parts)

    def __iter__(self) -> Iterator[Ref]:
        for n in sorted(self.named):
            yield n
        for p in self.parts:
            if p.cofinite:
                for i in count(p.base):
                    if i not in p.indices:
                        yield (p.family, i)
            else:
                for i in sorted(p.indices):
                    yield (p.family, i)

    def enumerate(self, limit: int) -> list:
        """First ``limit`` members in canonical order.

        Cofinite families are infinite, so members of a later family are only
        reached when every earlier family is finite.  Use ``enumerate_upto``
        for a bounded listing across families.
        """
        out = []
        if limit <= 0:
            return out
        for r in self:
            out.append(r)
            if len(out) >= limit:
                break
        return out

    def enumerate_upto(self, max_index: int) -> list:
        """All members whose family index (if any) is at most ``max_index``."""
        out = sorted(self.named)
        for p in self.parts:
            if p.cofinite:
                out.extend((p.family, i) for i in range(p.base, max_index + 1)
                           if i not in p.indices)
            else:
                out.extend((p.family, i) for i in sorted(p.indices) if i <= max_index)
        return out

    def elements(self) -> list:
        """All members of a finite set."""
        if not self.is_finite():
            raise ValueError("cannot list an infinite set")
        return list(self)

    def families(self) -> dict:
        return {p.family: p.base for p in self.parts}

    def part(self, family: str) -> Optional[FamilyPart]:
        for p in self.parts:
            if p.family == family:
                return p
        return None

    def single(self) -> Optional[Ref]:
        """The unique member of a singleton, else None."""
        if self.cardinality() == 1:
            return next(iter(self))
        return None

    def max_index(self) -> int:
        """Largest index mentioned explicitly (members or exclusions), or -1."""
        m = -1
        for p in self.parts:
            m = max([m, p.base] + list(p.indices))
        return m

    def sort_key(self):
        return (tuple(sorted(self.named)), tuple(p.key() for p in self.parts))

    def __str__(self) -> str:
        items = [format_ref(n) for n in sorted(self.named)]
        for p in self.parts:
            if p.cofinite:
                s = f"{p.family}[{p.base}..]"
                if p.indices:
                    s += "\\{" + ",".join(str(i) for i in sorted(p.indices)) + "}"
                items.append(s)
            else:
                items.extend(f"{p.family}[{i}]" for i in sorted(p.indices))
        return "{" + ", ".join(items) + "}"


SymbolicVertexSet = SymbolicSet


def canon(s: SymbolicSet) -> SymbolicSet:
    """Rebuild a set through the canonicalizing constructors."""
    parts = []
    for p in sorted(s.parts, key=lambda p: p.family):
        q = _make_part(p.family, p.base, p.cofinite, p.indices)
        if q is not None:
            parts.append(q)
    return SymbolicSet(frozenset(s.named), tuple(parts))
