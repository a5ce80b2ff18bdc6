"""Text syntax for refs and set expressions.

Grammar::

    expr  := FINITE([ref, ...])
           | FAMILY(id) [MINUS FINITE([ref, ...])]
           | UNION(expr, ...) | INTER(expr, ...)
           | R(edge-ref)                      (only when a range resolver is given)
    ref   := id | id[int]
"""

from __future__ import annotations

import re
from typing import Callable, Optional

from .symsets import Ref, SymbolicSet, format_ref

_TOKEN = re.compile(r"\s*(?:(?P<num>-?\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[\[\](),]))")


class ExprError(ValueError):
    pass


def parse_ref(text: str) -> Ref:
    m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*(?:\[\s*(-?\d+)\s*\])?\s*", text)
    if not m:
        raise ExprError(f"bad ref {text!r}")
    if m.group(2) is None:
        return m.group(1)
    return (m.group(1), int(m.group(2)))


class _Parser:
    def __init__(self, text, bases, range_of):
        self.text = text
        self.bases = bases
        self.range_of = range_of
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise ExprError(f"unexpected character at column {pos + 1} in {text!r}")
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ExprError(f"expected {value or 'token'} at column {tok[2] + 1} in {self.text!r}")
        self.i += 1
        return tok

    def ref(self) -> Ref:
        kind, name, _ = self.take()
        if kind != "id":
            raise ExprError(f"expected identifier, got {name!r}")
        if self.peek()[1] == "[":
            self.take("[")
            k, num, col = self.take()
            if k != "num":
                raise ExprError(f"expected index at column {col + 1}")
            self.take("]")
            return (name, int(num))
        return name

    def ref_list(self):
        self.take("[")
        refs = []
        if self.peek()[1] != "]":
            refs.append(self.ref())
            while self.peek()[1] == ",":
                self.take(",")
                refs.append(self.ref())
        self.take("]")
        return refs

    def finite(self):
        self.take("(")
        refs = self.ref_list()
        self.take(")")
        for r in refs:
            if isinstance(r, tuple) and r[0] not in self.bases:
                raise ExprError(f"unknown vertex family {r[0]}")
        return SymbolicSet.of(refs, self.bases)

    def expr(self) -> SymbolicSet:
        kind, word, col = self.take()
        if kind != "id":
            raise ExprError(f"expected expression at column {col + 1} in {self.text!r}")
        if word == "FINITE":
            return self.finite()
        if word == "FAMILY":
            self.take("(")
            _, fam, fcol = self.take()
            if fam not in self.bases:
                raise ExprError(f"unknown vertex family {fam}")
            self.take(")")
            excluded = []
            if self.peek()[1] == "MINUS":
                self.take("MINUS")
                self.take("FINITE")
                self.take("(")
                refs = self.ref_list()
                self.take(")")
                for r in refs:
                    if not (isinstance(r, tuple) and r[0] == fam):
                        raise ExprError(f"MINUS list of FAMILY({fam}) may only name {fam}[i]")
                    excluded.append(r[1])
            return SymbolicSet.cofinite(fam, self.bases[fam], excluded)
        if word in ("UNION", "INTER"):
            self.take("(")
            items = [self.expr()]
            while self.peek()[1] == ",":
                self.take(",")
                items.append(self.expr())
            self.take(")")
            out = items[0]
            for s in items[1:]:
                out = out.union(s) if word == "UNION" else out.intersect(s)
            return out
        if word == "R" and self.range_of is not None:
            self.take("(")
            e = self.ref()
            self.take(")")
            try:
                return self.range_of(e)
            except KeyError:
                raise ExprError(f"R({format_ref(e)}) at column {col + 1} names no edge") from None
        raise ExprError(f"unknown operator {word!r} at column {col + 1}")


def parse_set(text: str, bases: dict, range_of: Optional[Callable] = None) -> SymbolicSet:
    p = _Parser(text, bases, range_of)
    s = p.expr()
    if p.peek()[0] is not None:
        raise ExprError(f"trailing input at column {p.peek()[2] + 1} in {text!r}")
    return s


def format_set(s: SymbolicSet) -> str:
    """Canonical expression text for a set."""
    finite_refs = [format_ref(n) for n in sorted(s.named)]
    cof = []
    for p in s.parts:
        if p.cofinite:
            t = f"FAMILY({p.family})"
            if p.indices:
                t += " MINUS FINITE([" + ", ".join(
                    f"{p.family}[{i}]" for i in sorted(p.indices)) + "])"
            cof.append(t)
        else:
            finite_refs.extend(f"{p.family}[{i}]" for i in sorted(p.indices))
    items = []
    if finite_refs or not cof:
        items.append("FINITE([" + ", ".join(finite_refs) + "])")
    items.extend(cof)
    if len(items) == 1:
        return items[0]
    return "UNION(" + ", ".join(items) + ")"
