import pytest

from poissonlr.exact.piecewise import CIRCLE
from poissonlr.exact.presentation import Frame, Sym, builtin, load_presentation, make_presentation
from poissonlr.exact.scalar import ONE

CUSTOM = """
kind: circle
smoothness: 3
cover: [["-1/8", "5/8"], ["3/8", "9/8"]]
generators:
  bump1: {type: function, bump: ["0", "1/8", "1/4", "3/8"], scale: "2"}
  fld: {type: field, bump: ["1/4", "3/8", "1/2", "5/8"], add: "1"}
"""


def test_canonical_one():
    p = make_presentation("canonical", n=1)
    assert set(p.named) >= {"q", "p"}
    assert p.bracket(Sym("q", 1), Sym("p", 1)) == [(ONE, None)]
    assert p.bracket(Sym("q", 1), Sym("q", 1)) == []


def test_circle_constructor_contract():
    p = make_presentation("circle", smoothness=3, grid=8)
    assert p.compact and p.frame == [Frame(CIRCLE)]
    assert p.lr_enabled


def test_current_has_no_lr():
    p = make_presentation("current")
    assert not p.lr_enabled
    with pytest.raises(ValueError):
        p.lr(None, p.named["jv"])


@pytest.mark.parametrize("name, kind", [
    ("circle", "circle"), ("line", "line"), ("canonical3", "canonical"),
    ("current-circle", "current"), ("canonical", "canonical"),
])
def test_builtin_names(name, kind):
    assert builtin(name).kind == kind


@pytest.mark.parametrize("name", ["torus", "canonicalx", ""])
def test_builtin_rejects(name):
    with pytest.raises(ValueError):
        builtin(name)


@pytest.mark.parametrize("kwargs", [{"smoothness": 1}, {"grid": 2}, {"n": 0}])
def test_constructor_preconditions(kwargs):
    with pytest.raises(ValueError):
        make_presentation("canonical", **kwargs)


def test_load_custom_file():
    p = load_presentation(CUSTOM)
    assert p.tag == "circle:custom"
    assert {"bump1", "fld"} <= set(p.named)
    assert p.named["bump1"].f(mpq_(3, 16)) == 2


def mpq_(a, b):
    from gmpy2 import mpq

    return mpq(a, b)


@pytest.mark.parametrize("text", [
    "kind: circle\nbogus: 1\n",
    "kind: circle\ngenerators:\n  Z: {type: function, constant: 1}\n",
    "kind: circle\ngenerators:\n  f: {type: function}\n",
    "kind: circle\nflags: {lr_enabled: maybe_not, other: 1}\n",
    "kind: circle\ncover: [[0]]\n",
    "[unclosed",
    "just text",
])
def test_load_rejects(text):
    with pytest.raises(ValueError):
        load_presentation(text)


def test_digest_stable_and_distinguishing():
    assert builtin("circle").digest() == builtin("circle").digest()
    assert builtin("circle").digest() != builtin("line").digest()
