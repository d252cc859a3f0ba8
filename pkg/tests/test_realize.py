import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from poissonlr.engine.terms import ONE_T, Z, Dot, Lie, Star, Sum, gen, jordan, named
from poissonlr.exact.piecewise import CIRCLE, LINE, PiecewiseFunction, VectorField, bump
from poissonlr.exact.presentation import Fn, Vf
from poissonlr.exact.scalar import I, ONE, Poly
from poissonlr.realize.checks import check_homomorphism, check_rule_instances, make_realization, rule_instances
from poissonlr.realize.classical import ClassicalElement, poisson_bracket_classical, realize_classical
from poissonlr.realize.crossed import (
    RigidFlow, RigidFlowError, flow_derivative_check, group_law_check, weyl_relation_check,
)
from poissonlr.realize.quantum import ALPHA, ZVAR, QuantumElement, QuantumRealization, realize_quantum

from conftest import pres

seeds = st.integers(0, 2**32 - 1)
rationals = st.builds(mpq, st.integers(-16, 16), st.integers(1, 8))
IZ = I * ZVAR
HALF = mpq(1, 2)


def rand(name, seed):
    p = pres(name)
    rng = random.Random(seed)
    return p, p.random_function(rng), p.random_field(rng).coefficient


def field(p, h):
    return gen(p, Vf(VectorField(h, check=False)))


def fn(p, f):
    return gen(p, Fn(f))


# ---------------------------------------------------------------------------
# classical


def test_classical_generators(circle):
    f = circle.named["f"].f
    h = circle.named["v"].v.coefficient
    assert realize_classical(named(circle, "f"), circle) == ClassicalElement(CIRCLE, {0: f})
    assert realize_classical(named(circle, "v"), circle) == ClassicalElement(CIRCLE, {1: h})
    assert realize_classical(Z, circle).is_zero()


def test_classical_bracket_convention(circle):
    f = circle.named["f"].f
    p = ClassicalElement.scalar(1, CIRCLE) * ClassicalElement(CIRCLE, {1: PiecewiseFunction.constant(1, CIRCLE)})
    got = poisson_bracket_classical(p, ClassicalElement(CIRCLE, {0: f}))
    assert got == ClassicalElement(CIRCLE, {0: f.derivative()})
    assert poisson_bracket_classical(p, p).is_zero()


@given(seeds)
def test_classical_bracket_of_fields(seed):
    p, h, k = rand("circle", seed)
    a, b = ClassicalElement(CIRCLE, {1: h}), ClassicalElement(CIRCLE, {1: k})
    expected = VectorField(h, check=False).bracket(VectorField(k, check=False)).coefficient
    assert poisson_bracket_classical(a, b) == ClassicalElement(CIRCLE, {1: expected})


def test_no_classical_image_of_currents(current):
    with pytest.raises(ValueError):
        make_realization(current, "classical")


# ---------------------------------------------------------------------------
# quantum


def test_field_operator_at_zero_alpha(circle):
    h = circle.named["v"].v.coefficient
    T = QuantumRealization(circle, alpha=0)(named(circle, "v"))
    assert T == QuantumElement(CIRCLE, {1: h, 0: h.derivative() * (IZ * HALF)})


def test_field_operator_with_alpha(circle):
    h = circle.named["v"].v.coefficient
    T = realize_quantum(named(circle, "v"), circle)
    assert T.terms[0] == h * (ZVAR * ALPHA) + h.derivative() * (IZ * HALF)


@pytest.mark.parametrize("name", ["circle", "line"])
@given(seed=seeds)
def test_quantum_relations(name, seed):
    p, f, h = rand(name, seed)
    k = p.random_field(random.Random(seed + 1)).coefficient
    r = QuantumRealization(p)
    Tv, Tw, F = r(field(p, h)), r(field(p, k)), r(fn(p, f))
    assert Tv.commutator(F) == QuantumElement.function(h * f.derivative()).scale(IZ)
    vw = VectorField(h, check=False).bracket(VectorField(k, check=False)).coefficient
    assert Tv.commutator(Tw) == r.field_operator(vw).scale(IZ)
    assert r(field(p, f * h)) == (F * Tv + Tv * F).scale(HALF)
    assert r(jordan(fn(p, f), field(p, h))) == r(field(p, f * h))


@given(seeds)
def test_real_fields_are_symmetric(seed):
    p, _, h = rand("circle", seed)
    T = realize_quantum(field(p, h), p, alpha=0)
    assert T.adjoint() == T


def test_momentum_reordering(circle):
    f = circle.named["f"].f
    P, F = QuantumElement.momentum(CIRCLE), QuantumElement.function(f)
    assert P * F == QuantumElement(CIRCLE, {1: f, 0: f.derivative() * IZ})


def _oracle_p_power_f(n, f):
    """``P^n f`` by repeated single swaps ``P g = g P + iz g'``."""
    terms = {0: f}  # word: f P^k, stored as {k: f}
    for _ in range(n):
        out = {}
        for k, g in terms.items():
            for kk, gg in ((k + 1, g), (k, g.derivative(strict=False) * IZ)):
                out[kk] = out[kk] + gg if kk in out else gg
        terms = out
    return QuantumElement(f.domain, terms)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_p_power_against_swap_oracle(circle, n):
    f = circle.named["g"].f
    P = QuantumElement.momentum(CIRCLE)
    x = QuantumElement.function(f)
    for _ in range(n):
        x = P * x
    assert x == _oracle_p_power_f(n, f)


def test_p_squared_formula(circle):
    f = circle.named["g"].f
    P = QuantumElement.momentum(CIRCLE)
    d1, d2 = f.derivative(), f.derivative().derivative()
    expected = QuantumElement(CIRCLE, {2: f, 1: d1 * (IZ * 2), 0: d2 * -(ZVAR * ZVAR)})
    assert P * P * QuantumElement.function(f) == expected


def test_z_images(circle):
    from poissonlr.central import build_Z_compact

    z1 = build_Z_compact(circle)
    assert realize_classical(z1, circle).is_zero()
    r = QuantumRealization(circle)
    assert r(z1) == r.scalar(IZ)


@given(seeds)
def test_alpha_family_is_polynomial_identity(seed):
    # relations checked with alpha symbolic hold after substituting any rational alpha
    p, f, h = rand("circle", seed)
    r = QuantumRealization(p)
    Tv, F = r(field(p, h)), r(fn(p, f))
    lhs = Tv.commutator(F).subs("alpha", mpq(3, 7))
    r2 = QuantumRealization(p, alpha=mpq(3, 7))
    assert lhs == r2(field(p, h)).commutator(r2(fn(p, f)))


def test_disjoint_supports_vanish(circle):
    f = bump(CIRCLE, 0, mpq(1, 16), mpq(1, 8), mpq(3, 16))
    h = bump(CIRCLE, mpq(1, 2), mpq(9, 16), mpq(5, 8), mpq(11, 16))
    t = Dot(fn(circle, f), field(circle, h))
    assert realize_classical(t, circle).is_zero()
    assert realize_quantum(t, circle).is_zero()


@pytest.mark.parametrize("name, backend", [
    ("circle", "quantum"), ("circle", "classical"), ("line", "quantum"), ("line", "classical"),
    ("canonical2", "quantum"), ("canonical2", "classical"), ("current-circle", "quantum"),
])
def test_homomorphism(name, backend):
    p = pres(name)
    rng = random.Random(11)
    pairs = [(named(p, a), named(p, b)) for a in p.named for b in p.named][:12]
    from poissonlr.engine.terms import random_term

    pairs += [(random_term(p, rng, 2), random_term(p, rng, 2)) for _ in range(6)]
    r = make_realization(p, backend)
    assert all(c.ok for c in check_homomorphism(pairs, r))


def test_z_is_scalar_in_quantum_image(circle):
    r = QuantumRealization(circle)
    a = r(named(circle, "v"))
    assert r(Z).commutator(a).is_zero()


@pytest.mark.parametrize("name, backend", [("circle", "quantum"), ("circle", "classical"),
                                           ("canonical2", "quantum")])
def test_rule_instances_are_identities(name, backend):
    p = pres(name)
    inst = rule_instances(p, random.Random(3), 60)
    assert len(inst) == 60
    z = None if backend == "quantum" else 0
    assert all(c.ok for c in check_rule_instances(inst, make_realization(p, backend, z)))


def test_weyl_canonical_commutator(canonical2):
    r = QuantumRealization(canonical2)
    q, p = r(named(canonical2, "q1")), r(named(canonical2, "p1"))
    assert q.commutator(p) == r.scalar(IZ)


def test_star_of_z(canonical1):
    r = QuantumRealization(canonical1)
    assert r(Dot(Star(Z), Z)) == r.scalar(ZVAR * ZVAR)


# ---------------------------------------------------------------------------
# crossed product


@pytest.mark.parametrize("name", ["circle", "line"])
@given(seed=seeds, lam=rationals, c=rationals.filter(bool))
def test_weyl_relation(name, seed, lam, c):
    p, f, _ = rand(name, seed)
    res = weyl_relation_check(p, lam, f, c)
    assert res["relation"] and res["series_matches_translation"] and res["uz_central"]


def test_quarter_rotation(circle):
    f = circle.named["f"].f
    res = weyl_relation_check(circle, mpq(1, 4), f, 1)
    assert res["shift"] == mpq(1, 4) and res["relation"]


def test_zero_flow_is_identity(circle):
    flow = RigidFlow(circle, 1)
    f = flow.function(circle.named["f"].f)
    assert flow.U(0) * f == f


@given(rationals, rationals, rationals.filter(bool))
def test_group_law(lam, mu, c):
    assert group_law_check(pres("circle"), lam, mu, c)


def test_non_rigid_flow_rejected(circle):
    with pytest.raises(RigidFlowError):
        RigidFlow(circle, circle.named["v"])
    with pytest.raises(RigidFlowError):
        RigidFlow(pres("canonical1"), 1)


@pytest.mark.parametrize("name", ["circle", "line"])
@pytest.mark.parametrize("gen_name", ["f", "g", "h", "v", "w", "D"])
def test_flow_derivative(name, gen_name):
    p = pres(name)
    if gen_name not in p.named:
        pytest.skip("generator not in this presentation")
    res = flow_derivative_check(p, mpq(3, 2), p.named[gen_name])
    assert res["ok"] and res["pieces"] >= 1


def test_flow_derivative_of_constant(circle):
    res = flow_derivative_check(circle, 1, Fn(PiecewiseFunction.constant(5, CIRCLE)))
    assert res["ok"]


def test_serialization_is_coefficient_list(circle):
    text = realize_quantum(named(circle, "v"), circle, alpha=0).serialize()
    lines = text.splitlines()
    assert [ln.split(":")[0] for ln in lines] == ["P^0", "P^1"]
    assert lines[1].startswith("P^1: circle k3 |")
