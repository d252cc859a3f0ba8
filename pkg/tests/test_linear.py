"""FREE-mode equality modulo linearity of the generator letters."""

import random

from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from poissonlr.engine.normal import CENTRAL, FREE, Verdict, equal, normalize
from poissonlr.engine.terms import Dot, Sum, gen, random_term
from poissonlr.exact.piecewise import VectorField
from poissonlr.exact.presentation import Cur, Vf
from poissonlr.exact.scalar import ONE, Poly

from conftest import pres

seeds = st.integers(0, 2**32 - 1)


def vf(p, h):
    return gen(p, Vf(VectorField(h, check=False)))


def test_letters_are_linear(circle):
    rng = random.Random(5)
    h1, h2 = circle.random_function(rng), circle.random_function(rng)
    w = vf(circle, circle.random_function(rng))
    split = Sum(((ONE, Dot(vf(circle, h1), w)), (ONE, Dot(vf(circle, h2), w))))
    merged = Dot(vf(circle, h1 + h2), w)
    assert equal(split, merged, FREE, circle) is Verdict.EQUAL


def test_scalars_move_between_slots(circle):
    rng = random.Random(6)
    h1, h2 = circle.random_function(rng), circle.random_function(rng)
    z = Poly.var("z")
    a = Dot(vf(circle, h1 * z), vf(circle, h2))
    b = Dot(vf(circle, h1), vf(circle, h2 * z))
    assert equal(a, b, FREE, circle) is Verdict.EQUAL


def test_order_still_matters(circle):
    rng = random.Random(7)
    v, w = (vf(circle, circle.random_function(rng)) for _ in range(2))
    assert equal(Dot(v, w), Dot(w, v), FREE, circle) is Verdict.UNKNOWN


def test_current_letters(current):
    rng = random.Random(8)
    h1, h2 = (current.random_function(rng) for _ in range(2))
    j = lambda h: gen(current, Cur(VectorField(h, check=False)))  # noqa: E731
    split = Sum(((mpq(2), j(h1)), (ONE, j(h2))))
    assert equal(split, j(h1 * 2 + h2), FREE, current) is Verdict.EQUAL


@given(seeds)
def test_free_equality_is_sound(seed):
    # anything FREE calls equal must also be equal in the canonical CENTRAL mode
    p = pres("circle")
    rng = random.Random(seed)
    a, b = random_term(p, rng, 2), random_term(p, rng, 2)
    if normalize(a, FREE, p) == normalize(b, FREE, p):
        assert normalize(a, CENTRAL, p) == normalize(b, CENTRAL, p)
