"""Exact piecewise-polynomial functions and vector fields on S^1 and R.

The circle has period 1 and always carries a breakpoint at 0; piece ``j``
covers ``[b_j, b_{j+1})`` with ``b_m = 1``.  On the line there is one more
piece than breakpoints and both tails are the same constant, so every
function is a constant plus a compactly supported spline.

Derivatives are taken piece by piece.  ``smoothness`` records the order up
to which one-sided derivatives agree at the breakpoints; it is validated on
construction and propagated (as a lower bound) by the arithmetic.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from math import comb

from gmpy2 import mpq

from poissonlr.exact.scalar import ONE, ZERO, Poly, as_q

CIRCLE = "circle"
LINE = "line"
SMOOTH = 10**6  # smoothness tag of globally polynomial functions

X = Poly.var("x")


class DomainError(ValueError):
    pass


class SmoothnessError(ValueError):
    pass


def _floor(q) -> int:
    q = mpq(q)
    return int(q.numerator // q.denominator)


def _frac(q):
    return mpq(q) - _floor(q)


class PiecewiseFunction:
    __slots__ = ("domain", "breaks", "pieces", "smoothness", "_h", "_key")

    def __init__(self, domain, breaks, pieces, smoothness=SMOOTH, *, check=True):
        if domain not in (CIRCLE, LINE):
            raise DomainError(f"unknown domain {domain!r}")
        breaks = [as_q(b) for b in breaks]
        pieces = [Poly.coerce(p) for p in pieces]
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if domain == CIRCLE:
            if not breaks:
                breaks = [mpq(0)]
            if breaks[0] != 0 or breaks[-1] >= 1:
                raise ValueError("circle breakpoints must start at 0 and lie in [0, 1)")
            if len(pieces) != len(breaks):
                raise ValueError("circle needs one piece per breakpoint")
        else:
            if len(pieces) != len(breaks) + 1:
                raise ValueError("line needs len(breaks) + 1 pieces")
            lo, hi = pieces[0], pieces[-1]
            if lo != hi or not lo.is_constant_in("x"):
                raise ValueError("line tails must be one and the same constant")
        self.domain = domain
        self.breaks, self.pieces = _merge(domain, breaks, pieces)
        if len(self.pieces) == 1 and self.pieces[0].is_constant_in("x"):
            smoothness = SMOOTH
        self.smoothness = smoothness
        self._h = None
        self._key = None
        if check:
            self._check_smooth()

    # -- construction helpers ---------------------------------------------
    @classmethod
    def constant(cls, c, domain=CIRCLE) -> "PiecewiseFunction":
        c = Poly.coerce(c)
        if domain == CIRCLE:
            return cls(CIRCLE, [0], [c], check=False)
        return cls(LINE, [], [c], check=False)

    @classmethod
    def _raw(cls, domain, breaks, pieces, smoothness):
        return cls(domain, breaks, pieces, smoothness, check=False)

    def _check_smooth(self):
        k = self.smoothness
        if k < 0:
            return
        deg = max((p.degree("x") for p in self.pieces), default=0)
        top = min(k, deg + 1)
        n = len(self.pieces)
        for j, b in enumerate(self.breaks):
            if self.domain == CIRCLE:
                left, right = self.pieces[j - 1], self.pieces[j]
                bl = mpq(1) if j == 0 else b
            else:
                left, right = self.pieces[j], self.pieces[j + 1]
                bl = b
            lp, rp = left, right
            for order in range(top + 1):
                if lp(bl) != rp(b):
                    raise SmoothnessError(
                        f"derivative {order} jumps at breakpoint {b} (piece {j % n})"
                    )
                lp, rp = lp.diff(), rp.diff()

    # -- access -------------------------------------------------------------
    def _index(self, t) -> int:
        if self.domain == CIRCLE:
            return bisect_right(self.breaks, t) - 1
        return bisect_right(self.breaks, t)

    def piece_at(self, t) -> Poly:
        """Polynomial valid on the piece containing ``t`` (right-continuous)."""
        t = as_q(t)
        if self.domain == CIRCLE:
            t = _frac(t)
        return self.pieces[self._index(t)]

    def __call__(self, t) -> Poly:
        t = as_q(t)
        if self.domain == CIRCLE:
            t = _frac(t)
        return self.pieces[self._index(t)](t)

    def intervals(self):
        """``(left, right, poly)`` triples; ``None`` marks an infinite end."""
        b = self.breaks
        if self.domain == CIRCLE:
            ends = list(b[1:]) + [mpq(1)]
            return list(zip(b, ends, self.pieces))
        lefts = [None] + list(b)
        rights = list(b) + [None]
        return list(zip(lefts, rights, self.pieces))

    def is_constant(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0].is_constant_in("x")

    def constant_value(self):
        return self.pieces[0] if self.is_constant() else None

    def is_zero(self) -> bool:
        return len(self.pieces) == 1 and not self.pieces[0]

    def tail(self) -> Poly:
        if self.domain != LINE:
            raise DomainError("tails exist only on the line")
        return self.pieces[0]

    # -- arithmetic -----------------------------------------------------------
    def _refine(self, other):
        if not isinstance(other, PiecewiseFunction):
            raise TypeError("expected a PiecewiseFunction")
        if other.domain != self.domain:
            raise DomainError("domain-tag mismatch")
        bs = sorted(set(self.breaks) | set(other.breaks))
        if self.domain == CIRCLE:
            lefts = bs
        else:
            lefts = [None] + bs

        def pick(f, left):
            if left is None:
                return f.pieces[0]
            return f.pieces[f._index(left)]

        return bs, [pick(self, l) for l in lefts], [pick(other, l) for l in lefts]

    def _combine(self, other, op):
        bs, ps, qs = self._refine(other)
        pieces = [op(p, q) for p, q in zip(ps, qs)]
        k = min(self.smoothness, other.smoothness)
        return PiecewiseFunction._raw(self.domain, bs, pieces, k)

    def __add__(self, other):
        if not isinstance(other, PiecewiseFunction):
            other = PiecewiseFunction.constant(other, self.domain)
        return self._combine(other, lambda p, q: p + q)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, PiecewiseFunction):
            other = PiecewiseFunction.constant(other, self.domain)
        return self._combine(other, lambda p, q: p - q)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.map(lambda p: -p)

    def __mul__(self, other):
        if isinstance(other, PiecewiseFunction):
            return self._combine(other, lambda p, q: p * q)
        c = Poly.coerce(other)
        if not c.is_constant_in("x"):
            raise TypeError("scalars must not depend on the coordinate")
        return self.map(lambda p: p * c)

    __rmul__ = __mul__

    def map(self, fn, smoothness=None):
        k = self.smoothness if smoothness is None else smoothness
        return PiecewiseFunction._raw(
            self.domain, self.breaks, [fn(p) for p in self.pieces], k
        )

    def derivative(self, strict: bool = True) -> "PiecewiseFunction":
        if strict and self.smoothness < 1:
            raise SmoothnessError("derivative of a C^0 function")
        k = self.smoothness if self.smoothness >= SMOOTH else self.smoothness - 1
        return self.map(lambda p: p.diff("x"), smoothness=max(k, -1))

    def conj(self) -> "PiecewiseFunction":
        return self.map(lambda p: p.conj())

    def subs(self, name: str, value) -> "PiecewiseFunction":
        if name == "x":
            raise ValueError("use __call__ to evaluate in the coordinate")
        return self.map(lambda p: p.subs(name, value))

    def translate(self, s) -> "PiecewiseFunction":
        """The function ``t -> f(t + s)``."""
        s = as_q(s)
        if not s:
            return self
        if self.domain == LINE:
            return PiecewiseFunction._raw(
                LINE, [b - s for b in self.breaks],
                [p.shift(s) for p in self.pieces], self.smoothness,
            )
        bs = sorted({mpq(0)} | {_frac(b - s) for b in self.breaks})
        ends = bs[1:] + [mpq(1)]
        pieces = []
        for lo, hi in zip(bs, ends):
            src = (lo + hi) / 2 + s
            n = _floor(src)
            p = self.pieces[self._index(src - n)]
            pieces.append(p.shift(s - n))
        return PiecewiseFunction._raw(CIRCLE, bs, pieces, self.smoothness)

    # -- geometry -------------------------------------------------------------
    def support(self) -> list[tuple]:
        """Minimal closed cover of the non-zero set.

        Line intervals may have infinite ends (``-math.inf``/``math.inf``);
        circle arcs are lifted ``(a, b)`` with ``0 <= a < 1`` and
        ``a < b <= a + 1``.
        """
        runs = []
        for lo, hi, p in self.intervals():
            if not p:
                continue
            lo = -math.inf if lo is None else lo
            hi = math.inf if hi is None else hi
            if runs and runs[-1][1] == lo:
                runs[-1] = (runs[-1][0], hi)
            else:
                runs.append((lo, hi))
        if self.domain == CIRCLE and runs:
            if len(runs) == 1 and runs[0] == (0, 1):
                return [(mpq(0), mpq(1))]
            if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == 1:
                first = runs.pop(0)
                last = runs.pop()
                runs.append((last[0], first[1] + 1))
        return runs

    # -- identity -------------------------------------------------------------
    def key(self):
        if self._key is None:
            self._key = (
                self.domain,
                tuple(str(b) for b in self.breaks),
                tuple(str(p) for p in self.pieces),
            )
        return self._key

    def __eq__(self, other):
        if not isinstance(other, PiecewiseFunction):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.breaks == other.breaks
            and self.pieces == other.pieces
        )

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.domain, self.breaks, self.pieces))
        return self._h

    def __repr__(self):
        return f"PiecewiseFunction({serialize_function(self)})"


def _merge(domain, breaks, pieces):
    if domain == CIRCLE:
        bs, ps = [breaks[0]], [pieces[0]]
        for b, p in zip(breaks[1:], pieces[1:]):
            if p == ps[-1]:
                continue
            bs.append(b)
            ps.append(p)
        return tuple(bs), tuple(ps)
    bs, ps = [], [pieces[0]]
    for b, p in zip(breaks, pieces[1:]):
        if p == ps[-1]:
            continue
        bs.append(b)
        ps.append(p)
    return tuple(bs), tuple(ps)


# ---------------------------------------------------------------------------
# serialization


def serialize_function(f: PiecewiseFunction) -> str:
    """``circle k3 | 0: <poly>; 1/4: <poly>`` (line: first piece is the tail)."""
    k = "kinf" if f.smoothness >= SMOOTH else f"k{f.smoothness}"
    if f.domain == CIRCLE:
        body = "; ".join(f"{b}: {p}" for b, p in zip(f.breaks, f.pieces))
    else:
        parts = [f"-inf: {f.pieces[0]}"]
        parts += [f"{b}: {p}" for b, p in zip(f.breaks, f.pieces[1:])]
        body = "; ".join(parts)
    return f"{f.domain} {k} | {body}"


def parse_function(text: str) -> PiecewiseFunction:
    head, _, body = text.partition("|")
    words = head.split()
    if len(words) != 2:
        raise ValueError(f"bad function header {head!r}")
    domain, ktag = words
    if not ktag.startswith("k"):
        raise ValueError(f"bad smoothness tag {ktag!r}")
    k = SMOOTH if ktag == "kinf" else int(ktag[1:])
    breaks, pieces = [], []
    for chunk in body.split(";"):
        if not chunk.strip():
            continue
        b, _, p = chunk.partition(":")
        b = b.strip()
        if b != "-inf":
            breaks.append(as_q(b))
        pieces.append(Poly.parse(p))
    return PiecewiseFunction(domain, breaks, pieces, k)


# ---------------------------------------------------------------------------
# vector fields


class VectorField:
    """``h * d/dx`` for a piecewise coefficient ``h``."""

    __slots__ = ("coefficient",)

    def __init__(self, coefficient: PiecewiseFunction, *, check=True):
        if check and coefficient.domain == LINE and coefficient.tail():
            raise ValueError("vector fields on the line must have compact support")
        self.coefficient = coefficient

    @property
    def domain(self):
        return self.coefficient.domain

    @property
    def smoothness(self):
        return self.coefficient.smoothness

    def act(self, f: PiecewiseFunction) -> PiecewiseFunction:
        if f.domain != self.domain:
            raise DomainError("domain-tag mismatch")
        return self.coefficient * f.derivative(strict=False)

    def bracket(self, other: "VectorField") -> "VectorField":
        if other.domain != self.domain:
            raise DomainError("domain-tag mismatch")
        h, k = self.coefficient, other.coefficient
        c = h * k.derivative(strict=False) - k * h.derivative(strict=False)
        return VectorField(c, check=False)

    def scaled(self, f) -> "VectorField":
        if isinstance(f, PiecewiseFunction) and f.domain != self.domain:
            raise DomainError("domain-tag mismatch")
        return VectorField(self.coefficient * f, check=False)

    def __add__(self, other):
        return VectorField(self.coefficient + other.coefficient, check=False)

    def __sub__(self, other):
        return VectorField(self.coefficient - other.coefficient, check=False)

    def __neg__(self):
        return VectorField(-self.coefficient, check=False)

    def is_zero(self):
        return self.coefficient.is_zero()

    def translate(self, s):
        return VectorField(self.coefficient.translate(s), check=False)

    def support(self):
        return self.coefficient.support()

    def key(self):
        return self.coefficient.key()

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.coefficient == other.coefficient

    def __hash__(self):
        return hash(("vf", self.coefficient))

    def __repr__(self):
        return f"VectorField({serialize_function(self.coefficient)})"


# ---------------------------------------------------------------------------
# public operations with contract checks


def _require(cond, msg, exc=ValueError):
    if not cond:
        raise exc(msg)


def function_arith(op: str, *args):
    """Dispatch ``add | mul | scale | derivative | conjugate``."""
    if op == "add":
        f, g = args
        return f + g
    if op == "mul":
        f, g = args
        return f * g
    if op == "scale":
        c, f = args
        return f * Poly.coerce(c)
    if op == "derivative":
        (f,) = args
        return f.derivative(strict=True)
    if op == "conjugate":
        (f,) = args
        return f.conj()
    raise ValueError(f"unknown op {op!r}")


def act(v: VectorField, f: PiecewiseFunction) -> PiecewiseFunction:
    _require(f.smoothness >= 1, "act needs a C^1 function", SmoothnessError)
    return v.act(f)


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    _require(
        v.smoothness >= 2 and w.smoothness >= 2,
        "lie_bracket needs C^2 coefficients", SmoothnessError,
    )
    return v.bracket(w)


def lr_product(f: PiecewiseFunction, v: VectorField) -> VectorField:
    return v.scaled(f)


def support(obj) -> list[tuple]:
    return obj.support()


# ---------------------------------------------------------------------------
# bumps, covers and partitions of unity


def smoothstep(k: int) -> Poly:
    """Degree ``2k+1`` polynomial rising from 0 to 1 on [0, 1] with flat ``k``-jets."""
    t = X
    s = ZERO
    for j in range(k + 1):
        s = s + Poly.const(comb(k + j, j) * comb(2 * k + 1, k - j) * (-1) ** j) * t ** j
    return s * t ** (k + 1)


def _ramp(a, c, k, rising=True) -> Poly:
    s = smoothstep(k)
    a, c = as_q(a), as_q(c)
    u = (X - a) * (1 / (c - a))
    r = s.subs("x", u)
    return r if rising else ONE - r


def bump_line(a, c, d, b, k: int = 3) -> PiecewiseFunction:
    """Plateau bump on the line: 0 off ``(a, b)``, 1 on ``[c, d]``."""
    a, c, d, b = (as_q(t) for t in (a, c, d, b))
    if not (a < c <= d < b):
        raise ValueError("bump needs a < c <= d < b")
    up = _ramp(a, c, k)
    down = _ramp(d, b, k, rising=False)
    if c == d:
        return PiecewiseFunction(LINE, [a, c, b], [ZERO, up, down, ZERO], k, check=False)
    return PiecewiseFunction(LINE, [a, c, d, b], [ZERO, up, ONE, down, ZERO], k, check=False)


def wrap_to_circle(f: PiecewiseFunction) -> PiecewiseFunction:
    """Periodize a line function whose support is shorter than the period."""
    if f.domain != LINE:
        raise DomainError("wrap_to_circle expects a line function")
    c = f.tail()
    g = f - c if c else f
    sup = g.support()
    if not sup:
        return PiecewiseFunction.constant(c, CIRCLE)
    lo, hi = sup[0][0], sup[-1][1]
    if hi - lo >= 1:
        raise ValueError("support does not fit inside one period")
    bs = sorted({mpq(0)} | {_frac(b) for b in g.breaks})
    ends = bs[1:] + [mpq(1)]
    pieces = []
    for l, r in zip(bs, ends):
        m = (l + r) / 2
        n = math.ceil(lo - m)
        if m + n <= hi:
            pieces.append(g.piece_at(m + n).shift(n))
        else:
            pieces.append(ZERO)
    out = PiecewiseFunction._raw(CIRCLE, bs, pieces, f.smoothness)
    return out + c if c else out


def bump(domain, a, c, d, b, k: int = 3) -> PiecewiseFunction:
    """Plateau bump on the line, or on the circle via a lifted arc."""
    f = bump_line(a, c, d, b, k)
    if domain == CIRCLE:
        if as_q(b) - as_q(a) >= 1:
            raise ValueError("arc must be a proper subset of the circle")
        return wrap_to_circle(f)
    return f


def _normalize_arc(arc):
    a, b = as_q(arc[0]), as_q(arc[1])
    if not a < b:
        raise ValueError(f"empty arc {arc}")
    return a, b


def open_cover_ok(intervals, lo, hi) -> bool:
    """Do the open intervals cover the closed interval ``[lo, hi]``?"""
    reach = lo
    while True:
        best = None
        for a, b in intervals:
            if a < reach < b and (best is None or b > best):
                best = b
        if best is None:
            return False
        if best > hi:
            return True
        reach = best


def closed_cover_ok(intervals, lo, hi) -> bool:
    reach = lo
    while True:
        best = None
        for a, b in intervals:
            if a <= reach <= b and (best is None or b > best):
                best = b
        if best is None:
            return False
        if best >= hi:
            return True
        if best == reach:
            return False
        reach = best


def _unwrap(arcs):
    out = []
    for a, b in arcs:
        n = _floor(a)
        a2, b2 = a - n, b - n
        out += [(a2 - 1, b2 - 1), (a2, b2), (a2 + 1, b2 + 1)]
    return out


class CoverError(ValueError):
    pass


def _shrink(domain, arcs, lo, hi):
    """Largest ``delta`` (by halving) such that shrunk closed arcs still cover."""
    if domain == CIRCLE:
        ok = open_cover_ok(_unwrap(arcs), mpq(0), mpq(1))
    else:
        ok = open_cover_ok(arcs, lo, hi)
    if not ok:
        raise CoverError("cover has a gap")
    delta = min(b - a for a, b in arcs) / 4
    while True:
        shrunk = [(a + delta, b - delta) for a, b in arcs]
        if domain == CIRCLE:
            good = closed_cover_ok(_unwrap(shrunk), mpq(0), mpq(1))
        else:
            good = closed_cover_ok(shrunk, lo, hi)
        if good:
            return delta
        delta /= 2


class Partition:
    """Partition of unity data: functions, their arcs and inner arcs."""

    def __init__(self, domain, arcs, functions, inner, region=None):
        self.domain = domain
        self.arcs = arcs
        self.functions = functions
        self.inner = inner
        self.region = region

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)


def build_partition(domain, cover, k: int = 3, region=None) -> Partition:
    """Partition of unity subordinate to ``cover``.

    On the circle the sum is exactly 1; on the line it is exactly 1 on the
    compact ``region = (lo, hi)``.  ``inner[i]`` is an open arc holding
    ``supp g_i`` whose closure lies in ``cover[i]``.
    """
    arcs = [_normalize_arc(a) for a in cover]
    if domain == CIRCLE:
        for a, b in arcs:
            if b - a >= 1:
                raise CoverError("an arc must be a proper subset of the circle")
        lo = hi = None
    else:
        if region is None:
            raise ValueError("partitions on the line need a compact region")
        lo, hi = as_q(region[0]), as_q(region[1])
    delta = _shrink(domain, arcs, lo, hi)
    phis = [bump(domain, a + delta / 2, a + delta, b - delta, b - delta / 2, k) for a, b in arcs]
    funcs = []
    rest = PiecewiseFunction.constant(1, domain)
    for phi in phis:
        funcs.append(phi * rest)
        rest = rest * (PiecewiseFunction.constant(1, domain) - phi)
    inner = [(a + delta / 4, b - delta / 4) for a, b in arcs]
    return Partition(domain, arcs, funcs, inner, (lo, hi) if domain == LINE else None)


def partition_of_unity(cover, k: int = 3, domain=CIRCLE, region=None):
    return list(build_partition(domain, cover, k, region).functions)


def local_pair(inner, outer, k: int = 3, domain=CIRCLE):
    """Return ``(q, w)`` with ``{q, w} = -w(q) = 1`` on the closure of ``inner``.

    ``w = beta * d/dx`` and ``q = -(x - c) * beta`` where ``beta`` is a bump
    equal to 1 on ``inner`` and supported inside ``outer`` (centre ``c``).
    """
    a, b = _normalize_arc(inner)
    A, B = _normalize_arc(outer)
    if domain == CIRCLE:
        if B - A >= 1:
            raise CoverError("no global coordinate on the circle: outer arc must be proper")
        for n in (-1, 0, 1):
            if A < a + n and b + n < B:
                a, b = a + n, b + n
                break
    if not (A < a and b < B):
        raise CoverError("inner arc is not compactly contained in the outer arc")
    beta = bump_line((A + a) / 2, a, b, (b + B) / 2, k)
    c = (A + B) / 2
    q = beta.map(lambda p: p * (Poly.const(c) - X))
    if domain == CIRCLE:
        beta = wrap_to_circle(beta)
        q = wrap_to_circle(q)
    return q, VectorField(beta)


def pairing(q: PiecewiseFunction, w: VectorField) -> PiecewiseFunction:
    """``{q, w}`` under the convention ``{f, v} = -v(f)``."""
    return -w.act(q)
