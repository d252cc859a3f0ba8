import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonlr.cli.syntax import ParseError, generator_names, parse_expression, print_normal_form, print_term
from poissonlr.engine.normal import CENTRAL, FREE, normalize
from poissonlr.engine.terms import ONE_T, ZERO_T, Z, Dot, Lie, Star, commutator, jordan, named, random_term

from conftest import pres

seeds = st.integers(0, 2**32 - 1)
NAMES = ["circle", "line", "canonical2", "current-circle"]


def test_commutator(canonical1):
    q, p = named(canonical1, "q"), named(canonical1, "p")
    assert parse_expression("[q, p]", canonical1) == commutator(q, p)


def test_jordan(circle):
    f, v = named(circle, "f"), named(circle, "v")
    assert parse_expression("jordan(f, v)", circle) == jordan(f, v)


@pytest.mark.parametrize("text, tree", [
    ("Z", Z), ("1", ONE_T), ("0", ZERO_T), ("star(Z)", Star(Z)), ("{Z, 1}", Lie(Z, ONE_T)),
    ("Z.1.Z", Dot(Dot(Z, ONE_T), Z)),
])
def test_structural_atoms(text, tree):
    assert parse_expression(text) == tree


def test_unclosed_brace_reports_end_of_input(canonical1):
    with pytest.raises(ParseError) as exc:
        parse_expression("{q, p", canonical1)
    assert "end of input" in str(exc.value)
    assert (exc.value.line, exc.value.column) == (1, 6)


def test_error_position_on_second_line(canonical1):
    with pytest.raises(ParseError) as exc:
        parse_expression("q +\n  ] p", canonical1)
    assert (exc.value.line, exc.value.column) == (2, 3)


@pytest.mark.parametrize("text", ["nosuch", "q.nosuch"])
def test_unknown_generator(canonical1, text):
    with pytest.raises(ParseError, match="unknown generator"):
        parse_expression(text, canonical1)


def test_literal_on_wrong_presentation(circle):
    with pytest.raises(ParseError):
        parse_expression("rho<circle k3 | 0: 1>", circle)


def test_scalars(canonical1):
    t = parse_expression("3/4i q - <z*alpha> p", canonical1)
    assert print_term(t) == "3/4i q - <alpha*z> p" or parse_expression(print_term(t), canonical1) == t


@pytest.mark.parametrize("name", NAMES)
@given(seed=seeds)
def test_print_parse_round_trip(name, seed):
    p = pres(name)
    t = random_term(p, random.Random(seed), 3)
    for names in (None, generator_names(p)):
        text = print_term(t, names)
        assert parse_expression(text, p) == t


@pytest.mark.parametrize("name", NAMES)
@given(seed=seeds)
def test_normal_forms_parse_back(name, seed):
    p = pres(name)
    t = random_term(p, random.Random(seed), 2)
    for mode in (FREE, CENTRAL):
        nf = normalize(t, mode, p)
        again = parse_expression(print_normal_form(nf, generator_names(p)), p)
        assert normalize(again, mode, p) == nf


ALPHABET = list("{}[](),.+-/ <>|:;") + ["q1", "p2", "Z", "1", "0", "star(", "jordan(", "fn<", "3", "i", "x"]


@given(st.lists(st.sampled_from(ALPHABET), max_size=25).map("".join))
def test_parser_is_total(text):
    p = pres("canonical2")
    try:
        parse_expression(text, p)
    except ParseError:
        pass


@given(st.text(max_size=40))
def test_parser_is_total_on_arbitrary_text(text):
    try:
        parse_expression(text, pres("circle"))
    except ParseError:
        pass


def test_deep_nesting_is_an_error_not_a_crash():
    with pytest.raises(ParseError):
        parse_expression("(" * 5000 + "Z" + ")" * 5000)
