"""Exact sparse polynomials over the Gaussian rationals.

``Poly`` doubles as the scalar type (polynomials in formal parameters such
as ``z`` or ``alpha``) and as the piece type of piecewise functions, where
the reserved variable ``x`` is the base coordinate.  The imaginary unit is
the variable ``i`` with ``i**2 == -1``; every other variable is real.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

from poissonlr import kernels as K

Q = mpq

_SLOTS: dict[str, int] = {"i": 0, "x": 1}
_NAMES: list[str] = ["i", "x"]
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def slot(name: str) -> int:
    """Bit offset of variable ``name``, registering it on first use."""
    s = _SLOTS.get(name)
    if s is None:
        if not _NAME_RE.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        s = len(_NAMES)
        _SLOTS[name] = s
        _NAMES.append(name)
    return s * K.FIELD


def as_q(value) -> mpq:
    if isinstance(value, str):
        return mpq(Fraction(value))
    if isinstance(value, float):
        raise TypeError("floating point values are not exact")
    return mpq(value)


def _exponents(key: int) -> list[tuple[str, int]]:
    out = []
    s = 0
    while key:
        e = key & K.MASK
        if e:
            out.append((_NAMES[s], e))
        key >>= K.FIELD
        s += 1
    return out


def _mono_sort_key(key: int):
    exps = _exponents(key)
    return (sum(e for _, e in exps), sorted(exps))


class Poly:
    """Immutable sparse polynomial; also the scalar type."""

    __slots__ = ("_t", "_h")

    def __init__(self, terms: dict | None = None):
        self._t = terms if terms is not None else {}
        self._h = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        c = as_q(c)
        return cls({0: c} if c else {})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({1 << slot(name): mpq(1)})

    @classmethod
    def coerce(cls, value) -> "Poly":
        if isinstance(value, Poly):
            return value
        return cls.const(value)

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Poly(K.poly_add(self._t, other._t))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Poly(K.poly_sub(self._t, other._t))

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Poly(K.poly_sub(other._t, self._t))

    def __neg__(self):
        return Poly({k: -c for k, c in self._t.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            if len(other._t) == 1 and 0 in other._t:
                return Poly(K.poly_scale(self._t, other._t[0]))
            if len(self._t) == 1 and 0 in self._t:
                return Poly(K.poly_scale(other._t, self._t[0]))
            return Poly(K.poly_mul(self._t, other._t))
        if isinstance(other, (int, mpq, Fraction)):
            return Poly(K.poly_scale(self._t, mpq(other)))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            c = other.rational()
            if c is None:
                raise ZeroDivisionError("division by a non-constant scalar")
            other = c
        return self * (1 / mpq(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- structure ------------------------------------------------------
    def __bool__(self):
        return bool(self._t)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._t == other._t
        if isinstance(other, (int, mpq, Fraction)):
            return self._t == ({0: mpq(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    @property
    def terms(self) -> dict:
        return self._t

    def rational(self):
        """The value as an ``mpq`` when the polynomial is a rational constant."""
        if not self._t:
            return mpq(0)
        if len(self._t) == 1 and 0 in self._t:
            return self._t[0]
        return None

    def is_constant_in(self, name: str) -> bool:
        sh = slot(name)
        return all(not (k >> sh) & K.MASK for k in self._t)

    def degree(self, name: str) -> int:
        sh = slot(name)
        return max(((k >> sh) & K.MASK for k in self._t), default=-1)

    def variables(self) -> set[str]:
        out = set()
        for k in self._t:
            out.update(n for n, _ in _exponents(k))
        return out

    def conj(self) -> "Poly":
        return Poly({k: (-c if k & 1 else c) for k, c in self._t.items()})

    def diff(self, name: str = "x") -> "Poly":
        return Poly(K.poly_diff(self._t, slot(name)))

    def coeffs(self, name: str = "x") -> list["Poly"]:
        """Coefficients in ``name``, lowest degree first."""
        sh = slot(name)
        buckets: dict[int, dict] = {}
        for k, c in self._t.items():
            e = (k >> sh) & K.MASK
            buckets.setdefault(e, {})[k - (e << sh)] = c
        if not buckets:
            return []
        return [Poly(buckets.get(e, {})) for e in range(max(buckets) + 1)]

    @classmethod
    def from_coeffs(cls, coeffs, name: str = "x") -> "Poly":
        out = ZERO
        v = cls.var(name)
        p = ONE
        for c in coeffs:
            out = out + cls.coerce(c) * p
            p = p * v
        return out

    def subs(self, name: str, value) -> "Poly":
        """Substitute ``name -> value`` (a rational or a Poly)."""
        value = Poly.coerce(value)
        cs = self.coeffs(name)
        out = ZERO
        for c in reversed(cs):
            out = out * value + c
        return out

    def shift(self, s, name: str = "x") -> "Poly":
        """``p(name + s)`` for a rational or polynomial ``s``."""
        if not s:
            return self
        return self.subs(name, Poly.var(name) + Poly.coerce(s))

    def __call__(self, value):
        return self.subs("x", value)

    def divide_monomial(self, name: str, power: int = 1) -> "Poly":
        """Exact division by ``name**power``; raises if not divisible."""
        if name == "i":
            return self * (Poly.var("i") * -1) ** power
        sh = slot(name)
        step = power << sh
        out = {}
        for k, c in self._t.items():
            if ((k >> sh) & K.MASK) < power:
                raise ArithmeticError(f"not divisible by {name}^{power}")
            out[k - step] = c
        return Poly(out)

    # -- printing -------------------------------------------------------
    def sort_key(self):
        return tuple(
            (_mono_sort_key(k), (str(c)))
            for k, c in sorted(self._t.items(), key=lambda kc: _mono_sort_key(kc[0]))
        )

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        for k in sorted(self._t, key=_mono_sort_key):
            c = self._t[k]
            exps = _exponents(k)
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in sorted(exps))
            neg = c < 0
            a = -c if neg else c
            if mono:
                body = mono if a == 1 else f"{_qstr(a)}*{mono}"
            else:
                body = _qstr(a)
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append((" - " if neg else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"Poly({self})"

    @classmethod
    def parse(cls, text: str) -> "Poly":
        return _parse_poly(text)


def _qstr(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _coerce(other):
    if isinstance(other, Poly):
        return other
    if isinstance(other, (int, mpq, Fraction)):
        return Poly.const(other)
    return NotImplemented


ZERO = Poly()
ONE = Poly.const(1)
I = Poly.var("i")

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(\^)|(\*)|([+-])|(\()|(\)))")


def _parse_poly(text: str) -> Poly:
    """Parse the output format of ``Poly.__str__`` (plus parentheses)."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad polynomial syntax at {pos}: {text!r}")
        pos = m.end()
        toks.append(m.group(m.lastindex).strip() if m.lastindex else "")
    toks = [t for t in toks if t]
    it = _Cursor(toks)
    val = _p_expr(it)
    if it.peek() is not None:
        raise ValueError(f"trailing input in polynomial {text!r}")
    return val


class _Cursor:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        if t is None:
            raise ValueError("unexpected end of polynomial")
        self.i += 1
        return t


def _p_expr(it) -> Poly:
    sign = 1
    if it.peek() in ("+", "-"):
        sign = -1 if it.take() == "-" else 1
    out = _p_term(it) * sign
    while it.peek() in ("+", "-"):
        sign = -1 if it.take() == "-" else 1
        out = out + _p_term(it) * sign
    return out


def _p_term(it) -> Poly:
    out = _p_factor(it)
    while it.peek() == "*":
        it.take()
        out = out * _p_factor(it)
    return out


def _p_factor(it) -> Poly:
    t = it.take()
    if t == "(":
        base = _p_expr(it)
        if it.take() != ")":
            raise ValueError("expected ')'")
    elif t[0].isdigit():
        base = Poly.const(as_q(t))
    elif _NAME_RE.match(t):
        base = Poly.var(t)
    else:
        raise ValueError(f"unexpected token {t!r}")
    if it.peek() == "^":
        it.take()
        e = it.take()
        if not e.isdigit():
            raise ValueError("exponent must be a non-negative integer")
        base = base ** int(e)
    return base
