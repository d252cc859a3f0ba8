import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonlr import sampling as S
from poissonlr.cli.syntax import parse_expression
from poissonlr.engine.normal import CENTRAL, FREE, ModeError, Verdict, equal, normalize, quotient_z
from poissonlr.engine.rules import RuleError, apply_rule, rewrite
from poissonlr.engine.terms import (
    ONE_T, ZERO_T, Z, Dot, Lie, Star, Sum, commutator, construct, jordan, named, random_term,
)
from poissonlr.exact.scalar import ONE, Poly

from conftest import pres

HALF = Poly.const(1) / 2
seeds = st.integers(0, 2**32 - 1)


def nf(text, p, mode=CENTRAL):
    return normalize(parse_expression(text, p), mode, p)


def test_commutator_definition(canonical1):
    q, p = named(canonical1, "q"), named(canonical1, "p")
    assert commutator(q, p) == Sum(((ONE, Dot(q, p)), (-ONE, Dot(p, q))))


def test_jordan_definition(circle):
    f, v = named(circle, "f"), named(circle, "v")
    assert jordan(f, v) == Sum(((HALF, Dot(f, v)), (HALF, Dot(v, f))))


def test_star_stays_unexpanded(circle):
    f, v = named(circle, "f"), named(circle, "v")
    assert construct("star", construct("dot", f, v)) == Star(Dot(f, v))


def test_mixed_presentations_rejected(circle, line):
    with pytest.raises(ValueError):
        construct("dot", named(circle, "f"), named(line, "f"))


@pytest.mark.parametrize("i, j", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_canonical_commutators(canonical2, i, j):
    got = nf(f"[q{i}, p{j}]", canonical2)
    assert got == normalize(Z if i == j else ZERO_T, CENTRAL, canonical2)


def test_identity_absorbed(circle):
    assert nf("1.v", circle, FREE) == nf("v", circle, FREE)


@pytest.mark.parametrize("name", ["circle", "line", "canonical2", "current-circle"])
@given(seed=seeds)
def test_leibniz_on_generators_in_free_mode(name, seed):
    p = pres(name)
    rng = random.Random(seed)
    A, B, C = (S.generator(p, rng) for _ in range(3))
    lhs = Lie(A, Dot(B, C))
    rhs = Sum(((ONE, Dot(Lie(A, B), C)), (ONE, Dot(B, Lie(A, C)))))
    assert normalize(lhs, FREE, p) == normalize(rhs, FREE, p)


@given(seeds)
def test_leibniz_on_terms_in_central_mode(seed):
    p = pres("circle")
    rng = random.Random(seed)
    A, B, C = (random_term(p, rng, 2) for _ in range(3))
    lhs = Lie(A, Dot(B, C))
    rhs = Sum(((ONE, Dot(Lie(A, B), C)), (ONE, Dot(B, Lie(A, C)))))
    assert normalize(lhs, CENTRAL, p) == normalize(rhs, CENTRAL, p)


def test_field_normal_form_on_circle(circle):
    """h o D = h.D + 1/2 Z h' with the sign table in the README."""
    v = named(circle, "v")
    h = circle.named["v"].v.coefficient
    got = normalize(v, CENTRAL, circle).as_dict()
    assert got == {((circle.frame[0],), 0): h, ((), 1): h.derivative() * HALF}


def test_star_z_is_minus_z(circle):
    assert equal(Star(Z), Sum(((-ONE, Z),)), FREE, circle) is Verdict.EQUAL


def test_functions_commute(circle):
    assert equal(parse_expression("[f, g]", circle), ZERO_T, CENTRAL, circle) is Verdict.EQUAL


def test_free_algebra_undecided(circle):
    v, w = named(circle, "v"), named(circle, "w")
    assert equal(Dot(v, w), Dot(w, v), FREE, circle) is Verdict.UNKNOWN


def test_central_mode_decides_inequality(circle):
    v, w = named(circle, "v"), named(circle, "w")
    assert equal(Dot(v, w), Dot(w, v), CENTRAL, circle) is Verdict.NOT_EQUAL


def test_unknown_mode(circle):
    with pytest.raises(ModeError):
        normalize(ONE_T, "weird", circle)


def test_apply_leibniz_at_root(circle):
    A, B, C = (named(circle, n) for n in "fvw")
    out = apply_rule(Lie(A, Dot(B, C)), "LEIBNIZ", (), circle, "right")
    assert out == Sum(((ONE, Dot(Lie(A, B), C)), (ONE, Dot(B, Lie(A, C)))))


def test_apply_ident(circle):
    A = named(circle, "v")
    assert apply_rule(Dot(ONE_T, A), "IDENT", (), circle, "left") == A


def test_apply_farkas(canonical1):
    q, p = named(canonical1, "q"), named(canonical1, "p")
    out = apply_rule(Dot(commutator(q, p), Lie(q, p)), "FARKAS", (), canonical1)
    assert out == Dot(Lie(q, p), commutator(q, p))


def test_apply_rule_errors(circle):
    with pytest.raises(RuleError):
        apply_rule(named(circle, "v"), "LEIBNIZ", (), circle)
    with pytest.raises(RuleError):
        apply_rule(Dot(ONE_T, ONE_T), "IDENT", (5,), circle)


def test_quotient_examples(canonical1):
    assert normalize(quotient_z(Z, 0), CENTRAL, canonical1).is_zero()
    hbar = Poly.var("hbar")
    q_nf = normalize(parse_expression("[q, p]", canonical1), CENTRAL, canonical1).to_term()
    got = normalize(quotient_z(q_nf, hbar), CENTRAL, canonical1)
    assert got == normalize(Sum(((Poly.var("i") * hbar, ONE_T),)), CENTRAL, canonical1)
    z = Poly.var("z")
    got = normalize(quotient_z(Dot(Star(Z), Z), z), CENTRAL, canonical1)
    assert got == normalize(Sum(((z * z, ONE_T),)), CENTRAL, canonical1)


@pytest.mark.parametrize("name", ["circle", "line", "canonical2"])
@given(seed=seeds)
def test_normalize_is_idempotent(name, seed):
    p = pres(name)
    t = random_term(p, random.Random(seed), 3)
    once = normalize(t, CENTRAL, p)
    assert normalize(once.to_term(), CENTRAL, p) == once


@pytest.mark.parametrize("name", ["circle", "canonical2"])
@given(seed=seeds)
def test_rewriting_agrees_with_fast_path(name, seed):
    from poissonlr.engine.rules import readback

    p = pres(name)
    rng = random.Random(seed)
    t = random_term(p, rng, 2)
    out, _ = rewrite(t, p, CENTRAL, rng)
    assert readback(out, p, CENTRAL) == normalize(t, CENTRAL, p)


@given(seeds)
def test_z_is_central_for_both_products(seed):
    p = pres("circle")
    A = random_term(p, random.Random(seed), 2)
    assert normalize(Lie(Z, A), CENTRAL, p).is_zero()
    assert normalize(commutator(Z, A), CENTRAL, p).is_zero()


@given(seeds, seeds)
def test_star_is_anti_automorphism(s1, s2):
    p = pres("circle")
    A, B = random_term(p, random.Random(s1), 2), random_term(p, random.Random(s2), 2)
    assert normalize(Star(Dot(A, B)), CENTRAL, p) == normalize(Dot(Star(B), Star(A)), CENTRAL, p)
    assert normalize(Star(Star(A)), CENTRAL, p) == normalize(A, CENTRAL, p)
