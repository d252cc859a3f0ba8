import random

import pytest

from poissonlr import sampling as S
from poissonlr.engine.normal import CENTRAL, normalize
from poissonlr.engine.proofs import ProofScript, ReplayError, derive_farkas, farkas_sides
from poissonlr.engine.terms import ONE_T, named
from poissonlr.realize.quantum import QuantumRealization

from conftest import pres


def test_farkas_on_canonical_pair(canonical1):
    q, p = named(canonical1, "q"), named(canonical1, "p")
    s = derive_farkas(q, p, q, p, canonical1)
    assert s.valid(canonical1)
    assert s.check_ends(canonical1, CENTRAL)
    assert "FARKAS" not in s.rules_used()
    assert s.rules_used() <= {"LEIBNIZ", "LINEAR", "ASSOC"}


def test_farkas_with_identity_is_trivial(circle):
    v, w, f = (named(circle, n) for n in "vwf")
    lhs, rhs = farkas_sides(v, ONE_T, w, f)
    assert normalize(lhs, CENTRAL, circle).is_zero()
    assert normalize(rhs, CENTRAL, circle).is_zero()


@pytest.mark.parametrize("name", ["circle", "line", "current-circle", "canonical2"])
@pytest.mark.parametrize("seed", range(3))
def test_farkas_replays(name, seed):
    p = pres(name)
    rng = random.Random(seed)
    A, B, C, D = (S.generator(p, rng) for _ in range(4))
    s = derive_farkas(A, B, C, D, p)
    assert s.valid(p)
    if p.kind != "current":
        assert s.check_ends(p, CENTRAL)
    # independent route: both sides agree in the quantum image
    r = QuantumRealization(p)
    assert r(s.start) == r(s.end)


def test_tampered_script_is_rejected(circle):
    v, w, f, g = (named(circle, n) for n in "vwfg")
    s = derive_farkas(v, w, f, g, circle)
    k = len(s.steps) // 2
    step = s.steps[k]
    bad = ProofScript(s.start, s.end, s.steps[:k] + (step.shifted((7,)),) + s.steps[k + 1:], s.mode)
    with pytest.raises(ReplayError):
        bad.replay(circle)
    assert not bad.valid(circle)


def test_reversed_script_replays(circle):
    v, w, f, g = (named(circle, n) for n in "vwfg")
    s = derive_farkas(v, w, f, g, circle)
    r = s.reversed()
    assert r.start == s.end and r.valid(circle)


def test_record_is_plain_data(canonical1):
    q, p = named(canonical1, "q"), named(canonical1, "p")
    rec = derive_farkas(q, p, q, p, canonical1).record()
    assert rec["name"] == "farkas"
    assert all(set(step) == {"rule", "position", "arg", "direction"} for step in rec["steps"])
