"""Seeded random probes shared by the CLI verifiers and the acceptance suite."""

from __future__ import annotations

import random

from gmpy2 import mpq

from poissonlr.engine.terms import Dot, Gen, Lie, Sum, Term, gen
from poissonlr.exact.piecewise import CIRCLE, VectorField, bump
from poissonlr.exact.presentation import Cur, Fn, Rho, Vf
from poissonlr.exact.scalar import Poly

STEP = mpq(1, 16)


def generator(pres, rng: random.Random, kind=None) -> Term:
    return gen(pres, pres.random_payload(rng, kind))


def generator_pairs(pres, rng: random.Random, count: int):
    return [(generator(pres, rng), generator(pres, rng)) for _ in range(count)]


def window_bump(pres, rng: random.Random, a, b):
    """A random bump with support inside ``[a, b]`` on the 1/16 grid."""
    slots = int((b - a) / STEP)
    if slots < 2:
        raise ValueError("window too small")
    i = rng.randrange(0, slots - 1)
    j = rng.randrange(i + 2, slots + 1)
    lo, hi = a + i * STEP, a + j * STEP
    eps = (hi - lo) / 4
    return bump(pres.domain or CIRCLE, lo, lo + eps, hi - eps, hi, pres.smoothness)


def window_generator(pres, rng: random.Random, a, b, kind=None) -> Term:
    f = window_bump(pres, rng, a, b) * mpq(rng.choice((1, 2, -1, 3)), rng.choice((1, 2)))
    kind = kind or rng.choice(("f", "v"))
    if pres.kind == "current":
        return gen(pres, Rho(f) if kind == "f" else Cur(VectorField(f)))
    return gen(pres, Fn(f) if kind == "f" else Vf(VectorField(f)))


def window_term(pres, rng: random.Random, a, b) -> Term:
    """A generator, product or bracket of generators localized in ``[a, b]``."""
    x = window_generator(pres, rng, a, b)
    r = rng.random()
    if r < 0.5:
        return x
    y = window_generator(pres, rng, a, b)
    if r < 0.75:
        return Dot(x, y)
    if r < 0.9:
        return Lie(x, y)
    return Sum(((Poly.const(rng.randint(1, 3)), x), (Poly.const(-1), Dot(y, x))))


def random_window(rng: random.Random, lo, hi, min_width=mpq(1, 2)):
    """Sub-interval of ``[lo, hi]`` on the 1/16 grid, at least ``min_width`` wide."""
    slots = int((hi - lo) / STEP)
    w = int(min_width / STEP)
    i = rng.randrange(0, slots - w + 1)
    j = rng.randrange(i + w, slots + 1)
    return lo + i * STEP, lo + j * STEP


def disjoint_case(pres, rng: random.Random):
    """``(g, A)`` with ``supp g`` and ``supp A`` in disjoint windows."""
    if pres.domain == CIRCLE:
        s = mpq(rng.randrange(16), 16)
        g = window_bump(pres, rng, s, s + mpq(7, 16))
        A = window_term(pres, rng, s + mpq(1, 2), s + mpq(15, 16))
    else:
        s = mpq(rng.randrange(-48, 32), 16)
        g = window_bump(pres, rng, s, s + 1)
        A = window_term(pres, rng, s + mpq(17, 16), s + 3) if rng.random() < 0.5 else \
            window_term(pres, rng, s - 2, s - mpq(1, 16))
    return g, A


def plateau_case(pres, rng: random.Random):
    """``(g, A)`` with ``g = 1`` on a window holding ``supp A``."""
    if pres.domain == CIRCLE:
        a, b = random_window(rng, mpq(0), mpq(5, 8))
    else:
        a, b = random_window(rng, mpq(-3), mpq(3))
    A = window_term(pres, rng, a, b)
    g = bump(pres.domain, a - mpq(1, 8), a, b, b + mpq(1, 8), pres.smoothness)
    return g, A


def localized_probe(pres, rng: random.Random, reach=4):
    """A term localized in a random window of ``[-reach, reach]``."""
    a, b = random_window(rng, mpq(-reach), mpq(reach))
    return window_term(pres, rng, a, b)


def localized_pair(pres, rng: random.Random, reach=4):
    a, b = random_window(rng, mpq(-reach), mpq(reach), mpq(1))
    return window_generator(pres, rng, a, b), window_term(pres, rng, a, b)


def rigid_instance(pres, rng: random.Random):
    """``(lam, c, z, f, v_field_payload)`` with rational data."""
    lam = mpq(rng.randint(-8, 8), rng.choice((1, 2, 4, 8)))
    c = mpq(rng.choice((1, -1, 2, 3)), rng.choice((1, 2, 4)))
    z = mpq(rng.choice((1, 2, -1)), rng.choice((1, 2, 3)))
    f = pres.random_function(rng, constant=False)
    w = pres.random_payload(rng, "v")
    return lam, c, z, f, w


def is_generator(t: Term) -> bool:
    return isinstance(t, Gen)
