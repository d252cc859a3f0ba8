"""Syntactic terms of the free Poisson *-algebra over a presentation.

Terms are immutable trees.  ``Dot`` and ``Lie`` are binary, ``Sum`` holds
``(scalar, term)`` pairs and ``Star`` is the involution.  Nothing here
rewrites; see ``engine.normal`` and ``engine.rules``.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from poissonlr.exact.scalar import ONE, Poly

HALF = Poly.const(mpq(1, 2))


class MixedPresentationError(ValueError):
    pass


class Term:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def with_children(self, kids) -> "Term":
        return self

    # operator sugar: ``*`` is the associative product
    def __mul__(self, other):
        if isinstance(other, Term):
            return dot(self, other)
        return scale(other, self)

    def __rmul__(self, other):
        return scale(other, self)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1, other))

    def __neg__(self):
        return scale(-1, self)

    def __str__(self):
        from poissonlr.cli.syntax import print_term

        return print_term(self)


@dataclass(frozen=True)
class Gen(Term):
    payload: object
    pres: str

    def __repr__(self):
        return f"Gen({self.payload.text()})"


@dataclass(frozen=True)
class One(Term):
    def __repr__(self):
        return "One"


@dataclass(frozen=True)
class ZGen(Term):
    def __repr__(self):
        return "Z"


@dataclass(frozen=True)
class Dot(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return Dot(*kids)


@dataclass(frozen=True)
class Lie(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return Lie(*kids)


@dataclass(frozen=True)
class Sum(Term):
    items: tuple  # ((Poly, Term), ...)

    def children(self):
        return tuple(t for _, t in self.items)

    def with_children(self, kids):
        return Sum(tuple((c, k) for (c, _), k in zip(self.items, kids)))


@dataclass(frozen=True)
class Star(Term):
    child: Term

    def children(self):
        return (self.child,)

    def with_children(self, kids):
        return Star(kids[0])


ONE_T = One()
Z = ZGen()
ZERO_T = Sum(())


def presentations(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Gen):
            out.add(x.pres)
        else:
            stack.extend(x.children())
    return out


def _check(*terms):
    tags = set()
    for t in terms:
        if not isinstance(t, Term):
            raise TypeError(f"expected a Term, got {type(t).__name__}")
        tags |= presentations(t)
    if len(tags) > 1:
        raise MixedPresentationError(f"operands mix presentations {sorted(tags)}")


def dot(a: Term, b: Term) -> Term:
    _check(a, b)
    return Dot(a, b)


def lie(a: Term, b: Term) -> Term:
    _check(a, b)
    return Lie(a, b)


def star(a: Term) -> Term:
    _check(a)
    return Star(a)


def scale(c, a: Term) -> Term:
    _check(a)
    return Sum(((Poly.coerce(c), a),))


def add(*terms) -> Term:
    _check(*terms)
    return Sum(tuple((ONE, t) for t in terms))


def linear(pairs) -> Term:
    pairs = [(Poly.coerce(c), t) for c, t in pairs]
    _check(*(t for _, t in pairs))
    return Sum(tuple(pairs))


def commutator(a: Term, b: Term) -> Term:
    """``a.b - b.a``."""
    _check(a, b)
    return Sum(((ONE, Dot(a, b)), (-ONE, Dot(b, a))))


def jordan(a: Term, b: Term) -> Term:
    """``1/2 (a.b + b.a)``."""
    _check(a, b)
    return Sum(((HALF, Dot(a, b)), (HALF, Dot(b, a))))


def construct(op: str, *args) -> Term:
    table = {
        "dot": dot, "lie": lie, "star": star, "sum": add,
        "commutator": commutator, "jordan": jordan,
    }
    if op not in table:
        raise ValueError(f"unknown constructor {op!r}")
    return table[op](*args)


def gen(pres, payload) -> Term:
    """Generator leaf, canonicalized (constants become multiples of One)."""
    lin = pres.canon(payload)
    if len(lin) == 1 and lin[0][0] == ONE and lin[0][1] is not None:
        return Gen(lin[0][1], pres.tag)
    return linear([(c, ONE_T if p is None else Gen(p, pres.tag)) for c, p in lin])


def named(pres, name: str) -> Term:
    if name == "Z":
        return Z
    if name == "1":
        return ONE_T
    if name not in pres.named:
        raise KeyError(f"unknown generator {name!r}")
    return gen(pres, pres.named[name])


# ---------------------------------------------------------------------------
# positions


def subterm(t: Term, pos: tuple) -> Term:
    for i in pos:
        kids = t.children()
        if i >= len(kids):
            raise IndexError(f"no child {i} at {pos}")
        t = kids[i]
    return t


def replace(t: Term, pos: tuple, new: Term) -> Term:
    if not pos:
        return new
    kids = list(t.children())
    i = pos[0]
    if i >= len(kids):
        raise IndexError(f"no child {i}")
    kids[i] = replace(kids[i], pos[1:], new)
    return t.with_children(kids)


def positions(t: Term, prefix=()):
    """All positions, pre-order."""
    yield prefix
    for i, k in enumerate(t.children()):
        yield from positions(k, prefix + (i,))


def size(t: Term) -> int:
    return 1 + sum(size(k) for k in t.children())


def lie_count(t: Term) -> int:
    return (1 if isinstance(t, Lie) else 0) + sum(lie_count(k) for k in t.children())


def random_term(pres, rng, depth=3, ops=("dot", "lie", "sum", "star"), z=True, leaves=None):
    """Random term tree with generator leaves drawn from ``pres``."""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if z and r < 0.08:
            return Z
        if r < 0.14:
            return ONE_T
        if leaves:
            return rng.choice(leaves)
        return gen(pres, pres.random_payload(rng))
    op = rng.choice(ops)
    kid = lambda: random_term(pres, rng, depth - 1, ops, z, leaves)  # noqa: E731
    if op == "dot":
        return Dot(kid(), kid())
    if op == "lie":
        return Lie(kid(), kid())
    if op == "star":
        return Star(kid())
    c1 = Poly.const(rng.randint(-3, 3) or 1)
    c2 = Poly.const(rng.choice((1, -1, 2))) * (Poly.var("i") if rng.random() < 0.2 else 1)
    return Sum(((c1, kid()), (c2, kid())))
