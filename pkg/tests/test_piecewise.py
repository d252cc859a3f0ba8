import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from poissonlr.exact.piecewise import (
    CIRCLE, LINE, CoverError, DomainError, PiecewiseFunction, SmoothnessError, VectorField,
    act, build_partition, bump, function_arith, lie_bracket, local_pair, lr_product, pairing,
    parse_function, partition_of_unity, serialize_function, support,
)
from poissonlr.exact.scalar import Poly

from conftest import pres

X = Poly.var("x")
seeds = st.integers(0, 2**32 - 1)


def rand_fn(name, seed, constant=True):
    return pres(name).random_function(random.Random(seed), constant=constant)


def rand_field(name, seed):
    return pres(name).random_field(random.Random(seed))


def const(c, domain=CIRCLE):
    return PiecewiseFunction.constant(c, domain)


D = VectorField(const(1))


def test_derivative_of_square_on_one_piece():
    f = PiecewiseFunction(LINE, [0, 1], [0, X ** 2 * (X - 1) ** 2, 0], 1)
    df = function_arith("derivative", f)
    assert df.piece_at(mpq(1, 2)) == (X ** 2 * (X - 1) ** 2).diff()


def test_disjoint_product_is_zero():
    f = bump(CIRCLE, 0, mpq(1, 8), mpq(1, 4), mpq(3, 8))
    g = bump(CIRCLE, mpq(1, 2), mpq(5, 8), mpq(3, 4), mpq(7, 8))
    assert function_arith("mul", f, g).is_zero()


def test_partition_sums_to_one():
    g1, g2 = partition_of_unity([(mpq(-1, 8), mpq(5, 8)), (mpq(3, 8), mpq(9, 8))])
    assert function_arith("add", g1, g2) == const(1)


def test_whole_circle_arc_rejected():
    with pytest.raises(CoverError):
        partition_of_unity([(0, 1)])


def test_line_partition_is_one_on_region():
    part = build_partition(LINE, [(mpq(-1, 2), mpq(1, 2)), (mpq(1, 4), mpq(3, 2))], region=(0, 1))
    total = sum(part.functions[1:], part.functions[0])
    for t in [mpq(k, 16) for k in range(17)]:
        assert total(t) == 1
    assert total.tail() == 0
    lo, hi = total.support()[0][0], total.support()[-1][1]
    assert lo > -1 and hi < 2


def test_gappy_cover_rejected():
    with pytest.raises(CoverError):
        partition_of_unity([(0, mpq(1, 4)), (mpq(1, 2), mpq(3, 4))])


def test_act_of_frame_is_derivative(circle):
    f = rand_fn("circle", 3)
    assert act(D, f) == f.derivative()


@given(seeds, st.integers(-5, 5))
def test_act_kills_constants(seed, c):
    assert act(rand_field("circle", seed), const(c)).is_zero()


@given(seeds)
def test_lr_action_is_linear(seed):
    rng = random.Random(seed)
    f, g = (rand_fn("circle", rng.random()) for _ in range(2))
    v = rand_field("circle", rng.random())
    assert act(lr_product(f, v), g) == f * act(v, g)


def test_bracket_of_frame_with_coordinate_field():
    # theta d/dtheta on a piece of a line bump
    h = bump(LINE, -2, -1, 1, 2).map(lambda p: p * X)
    w = VectorField(h)
    c = lie_bracket(VectorField(const(1, LINE), check=False), w).coefficient
    assert c.piece_at(0) == Poly.const(1)


@given(seeds)
def test_bracket_antisymmetric(seed):
    v = rand_field("circle", seed)
    assert lie_bracket(v, v).is_zero()


@given(seeds, seeds, seeds)
def test_bracket_is_commutator_of_derivations(s1, s2, s3):
    v, w = rand_field("circle", s1), rand_field("circle", s2)
    f = rand_fn("circle", s3)
    lhs = act(lie_bracket(v, w), f)
    rhs = v.act(w.act(f)) - w.act(v.act(f))
    assert lhs == rhs


def test_lr_scalar_action():
    assert lr_product(const(2), D).coefficient == const(2)


@given(seeds, seeds, seeds)
def test_lr_product_associative_and_leibniz(s1, s2, s3):
    f, g = rand_fn("circle", s1), rand_fn("circle", s2)
    v, w = rand_field("circle", s3), rand_field("circle", s3 + 1)
    assert lr_product(f, lr_product(g, v)) == lr_product(f * g, v)
    lhs = v.bracket(lr_product(f, w))
    rhs = lr_product(v.act(f), w) + lr_product(f, v.bracket(w))
    assert lhs == rhs


def test_local_pair_pairing_is_one_on_inner():
    inner, outer = (0, mpq(1, 4)), (mpq(-1, 8), mpq(3, 8))
    q, w = local_pair(inner, outer)
    one = pairing(q, w)
    for t in [mpq(k, 64) for k in range(17)]:
        assert one(t) == 1
    # {q, g o w} = g for g supported in the inner arc
    g = bump(CIRCLE, mpq(1, 32), mpq(1, 16), mpq(3, 16), mpq(7, 32))
    assert pairing(q, lr_product(g, w)) == g


def test_local_pair_rejects_whole_circle():
    with pytest.raises(CoverError):
        local_pair((0, mpq(1, 4)), (0, 1))


@pytest.mark.parametrize("s", [mpq(1, 8), mpq(3, 4), mpq(-5, 16)])
def test_local_pair_is_rotation_equivariant(s):
    inner, outer = (0, mpq(1, 4)), (mpq(-1, 8), mpq(3, 8))
    q, w = local_pair(inner, outer)
    q2, w2 = local_pair((s, s + mpq(1, 4)), (s - mpq(1, 8), s + mpq(3, 8)))
    assert w2 == w.translate(-s)
    # the coordinate shifts by a constant on the inner arc
    diff = q2 - q.translate(-s)
    assert diff.derivative(strict=False).piece_at(s + mpq(1, 8)) == 0


def test_support_of_zero_and_bump():
    assert support(const(0)) == []
    a, b = mpq(1, 8), mpq(5, 8)
    assert support(bump(CIRCLE, a, mpq(1, 4), mpq(1, 2), b)) == [(a, b)]


def _inside(inner, outer):
    return all(any(lo <= a and b <= hi for lo, hi in outer) for a, b in inner)


@given(seeds, seeds)
def test_support_of_product(s1, s2):
    f = rand_fn("line", s1, constant=False)
    g = rand_fn("line", s2, constant=False)
    sp = support(f * g)
    assert _inside(sp, support(f)) and _inside(sp, support(g))


@given(seeds)
def test_serialize_round_trip(seed):
    for name in ("circle", "line"):
        f = rand_fn(name, seed)
        assert parse_function(serialize_function(f)) == f


def test_smoothness_is_enforced():
    with pytest.raises(SmoothnessError):
        PiecewiseFunction(LINE, [0, 1], [0, X * (X - 1), 0], 1)


def test_domain_mismatch():
    with pytest.raises(DomainError):
        const(1, CIRCLE) + const(1, LINE)


def test_line_fields_need_compact_support():
    with pytest.raises(ValueError):
        VectorField(const(1, LINE))


@given(seeds, st.builds(mpq, st.integers(-16, 16), st.integers(1, 8)))
def test_translate_evaluation(seed, s):
    f = rand_fn("circle", seed)
    t = mpq(3, 7)
    assert f.translate(s)(t) == f(t + s)
