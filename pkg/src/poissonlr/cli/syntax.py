"""Expression grammar: parser and printer for terms.

::

    expr   := ['-'] term (('+' | '-') term)*
    term   := [scalar] factor ('.' factor)*
    factor := '{' expr ',' expr '}' | '[' expr ',' expr ']'
            | 'star(' expr ')' | 'jordan(' expr ',' expr ')'
            | ident | literal | '(' expr ')'
    ident  := generator name | 'Z' | '1'
    scalar := NUMBER ['/' NUMBER] ['i'] | '<' polynomial '>'
    literal:= ('fn' | 'vec' | 'rho' | 'j') '<' serialized function '>'

A scalar with no factor after it stands for that multiple of the identity
(``0`` is the empty sum).  ``print_term`` emits text that parses back to
the identical tree.
"""

from __future__ import annotations

import re

from gmpy2 import mpq

from poissonlr.engine.terms import (
    ONE_T, Z, Dot, Gen, Lie, One, Star, Sum, Term, ZERO_T, ZGen, commutator, jordan,
)
from poissonlr.exact.piecewise import VectorField, parse_function, serialize_function
from poissonlr.exact.presentation import Cur, Fn, Frame, Rho, Sym, Vf
from poissonlr.exact.scalar import ONE, Poly

HALF = Poly.const(mpq(1, 2))


class ParseError(ValueError):
    def __init__(self, msg, text="", pos=0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.column = line, col
        super().__init__(f"{msg} at line {line}, column {col}")


_TOKENS = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lit>(?:fn|vec|rho|j)<[^<>]*>)
  | (?P<poly><[^<>]*>)
  | (?P<num>\d+(?:/\d+)?i?)
  | (?P<star>star\()
  | (?P<jordan>jordan\()
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+.,{}\[\]()])
    """,
    re.VERBOSE,
)


def tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, resolve):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.resolve = resolve

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        where = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ParseError(f"{msg} (found {where})", self.text, tok[2])

    def expect(self, value):
        t = self.peek()
        if t[1] != value or t[0] not in ("op",):
            self.fail(f"expected {value!r}")
        return self.take()

    def expr(self):
        sign = ONE
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            sign = -ONE
        c, body = self.term()
        nxt = self.peek()
        if sign == ONE and not (nxt[0] == "op" and nxt[1] in ("+", "-")):
            return body if c is None else Sum(((c, body),))
        items = [((c or ONE) * sign, body)]
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            s = ONE if self.take()[1] == "+" else -ONE
            c, body = self.term()
            items.append(((c or ONE) * s, body))
        return Sum(tuple(items))

    def scalar(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            imag = val.endswith("i")
            q = mpq(val[:-1] if imag else val)
            return Poly.const(q) * (Poly.var("i") if imag else ONE), val
        if kind == "poly":
            self.take()
            try:
                return Poly.parse(val[1:-1]), val
            except (ValueError, ArithmeticError) as exc:
                raise ParseError(f"bad scalar: {exc}", self.text, pos) from None
        return None, None

    def term(self):
        """``(scalar or None, body)``."""
        c, raw = self.scalar()
        if c is not None and not self._factor_start():
            nxt = self.peek()
            if raw == "1" and nxt[0] == "op" and nxt[1] == ".":
                c, body = None, ONE_T
            elif raw == "0":
                return None, ZERO_T
            elif raw == "1":
                return None, ONE_T
            else:
                return c, ONE_T
        else:
            body = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == ".":
            self.take()
            body = Dot(body, self.factor())
        return c, body

    def _factor_start(self):
        kind, val, _ = self.peek()
        if kind in ("lit", "star", "jordan", "name"):
            return True
        if kind == "num":
            return val == "1"
        return kind == "op" and val in ("{", "[", "(")

    def factor(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "{":
            self.take()
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("}")
            return Lie(a, b)
        if kind == "op" and val == "[":
            self.take()
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("]")
            return commutator(a, b)
        if kind == "op" and val == "(":
            self.take()
            a = self.expr()
            self.expect(")")
            return a
        if kind == "star":
            self.take()
            a = self.expr()
            self.expect(")")
            return Star(a)
        if kind == "jordan":
            self.take()
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return jordan(a, b)
        if kind == "num" and val == "1":
            self.take()
            return ONE_T
        if kind == "name":
            self.take()
            if val == "Z":
                return Z
            try:
                return self.resolve(val)
            except KeyError:
                raise ParseError(f"unknown generator {val!r}", self.text, pos) from None
        if kind == "lit":
            self.take()
            try:
                return self.resolve_literal(val)
            except (ValueError, ArithmeticError, TypeError) as exc:
                raise ParseError(f"bad literal: {exc}", self.text, pos) from None
        self.fail("expected a factor")

    def resolve_literal(self, val):
        head, _, body = val.partition("<")
        f = parse_function(body[:-1])
        payload = {
            "fn": lambda: Fn(f),
            "vec": lambda: Vf(VectorField(f)),
            "rho": lambda: Rho(f),
            "j": lambda: Cur(VectorField(f)),
        }[head]()
        return self.resolve(payload)


def parse_expression(text: str, pres=None) -> Term:
    """Parse ``text``; names and literals resolve against ``pres``."""
    from poissonlr.engine.terms import gen, named

    def resolve(x):
        if isinstance(x, str):
            if pres is None:
                raise KeyError(x)
            return named(pres, x)
        if pres is None:
            raise ValueError("literals need a presentation")
        _check_literal(pres, x)
        return Gen(x, pres.tag) if pres.canon(x) == [(ONE, x)] else gen(pres, x)

    p = _Parser(text, resolve)
    try:
        t = p.expr()
    except RecursionError:
        raise ParseError("expression nested too deeply", text, 0) from None
    if p.peek()[0] != "end":
        p.fail("unexpected trailing input")
    return t


def _check_literal(pres, x):
    kinds = {
        "circle": (Fn, Vf), "line": (Fn, Vf), "current": (Rho, Cur), "canonical": (),
    }[pres.kind]
    if not isinstance(x, kinds):
        raise ValueError(f"{type(x).__name__} generators do not belong to {pres.tag}")
    f = x.f if isinstance(x, (Fn, Rho)) else x.v.coefficient
    if f.domain != (pres.domain or "circle"):
        raise ValueError("literal lives on the wrong domain")


# ---------------------------------------------------------------------------
# printing


def scalar_text(c: Poly) -> str:
    q = c.rational()
    if q is not None:
        return f"{q.numerator}" if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    return f"<{c}>"


def _is_pair(t, c1, c2):
    if not (isinstance(t, Sum) and len(t.items) == 2):
        return None
    (a1, d1), (a2, d2) = t.items
    if a1 != c1 or a2 != c2 or not isinstance(d1, Dot) or not isinstance(d2, Dot):
        return None
    if d1.left == d2.right and d1.right == d2.left:
        return d1.left, d1.right
    return None


def print_term(t: Term, names: dict | None = None) -> str:
    names = names or {}

    def gen_text(p):
        if p in names:
            return names[p]
        if isinstance(p, Sym):
            return f"{p.letter}{p.index}"
        return p.text()

    def factor(x):
        if isinstance(x, Gen):
            return gen_text(x.payload)
        if isinstance(x, One):
            return "1"
        if isinstance(x, ZGen):
            return "Z"
        if isinstance(x, Lie):
            return "{" + expr(x.left) + ", " + expr(x.right) + "}"
        if isinstance(x, Star):
            return "star(" + expr(x.child) + ")"
        if isinstance(x, Sum):
            ab = _is_pair(x, ONE, -ONE)
            if ab:
                return "[" + expr(ab[0]) + ", " + expr(ab[1]) + "]"
            ab = _is_pair(x, HALF, HALF)
            if ab:
                return "jordan(" + expr(ab[0]) + ", " + expr(ab[1]) + ")"
        return "(" + expr(x) + ")"

    def chain(x):
        if isinstance(x, Dot):
            right = factor(x.right)
            if isinstance(x.right, Dot):
                right = "(" + chain(x.right) + ")"
            return chain(x.left) + "." + right
        return factor(x)

    def item(c, x, first, single):
        body = chain(x)
        q = c.rational()
        neg = q is not None and q < 0
        if neg:
            c = -c
        if single or c != ONE:
            body = f"{scalar_text(c)} {body}"
        if first:
            return f"- {body}" if neg else body
        return f" - {body}" if neg else f" + {body}"

    def expr(x):
        if isinstance(x, Sum):
            if _is_pair(x, ONE, -ONE) or _is_pair(x, HALF, HALF):
                return factor(x)
            if not x.items:
                return "0"
            single = len(x.items) == 1
            parts = [item(c, k, i == 0, single) for i, (c, k) in enumerate(x.items)]
            return "".join(parts)
        return chain(x)

    return expr(t)


def print_normal_form(nf, names: dict | None = None) -> str:
    return print_term(nf.to_term(), names)


def generator_names(pres) -> dict:
    """Reverse map payload -> name for readable printing."""
    out = {}
    for name in sorted(pres.named, key=lambda n: (len(n), n), reverse=True):
        out[pres.named[name]] = name
    if pres.frame:
        out[pres.frame[0]] = "D"
    return out


__all__ = [
    "ParseError", "parse_expression", "print_term", "print_normal_form", "tokenize",
    "generator_names", "scalar_text", "serialize_function", "Frame",
]
