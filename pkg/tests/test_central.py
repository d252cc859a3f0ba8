import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from poissonlr import sampling as S
from poissonlr.central import (
    NonCompactError, build_Z_compact, build_Z_sequence, build_Zg, canonical_Z, comm_centrality_script,
    decomposition_script, lie_centrality_script, uniqueness_script, verify_centrality,
    verify_localization, verify_relation_31, verify_sequence_relation, verify_stabilization,
)
from poissonlr.engine.normal import CENTRAL, Verdict, equal, normalize
from poissonlr.engine.terms import ONE_T, ZERO_T, Z, Dot, commutator, named
from poissonlr.exact.piecewise import CIRCLE, LINE, CoverError, bump
from poissonlr.realize.quantum import QuantumRealization
from poissonlr.report import FLAGGED, PASS

from conftest import pres

seeds = st.integers(0, 2**32 - 1)
THREE_ARCS = [(mpq(-1, 8), mpq(3, 8)), (mpq(1, 4), mpq(3, 4)), (mpq(5, 8), mpq(9, 8))]


@pytest.fixture(scope="module")
def z1():
    return build_Zg(pres("circle"), 1)


def test_z1_has_two_summands(z1):
    assert len(z1) == 2
    assert all(c.verdict == PASS for c in z1.validate())


def test_bump_inside_one_arc_gives_one_summand(circle):
    g = bump(CIRCLE, 0, mpq(1, 16), mpq(1, 8), mpq(3, 16))
    zc = build_Zg(circle, g)
    assert len(zc) == 1
    assert all(c.ok for c in zc.validate())


def test_cover_independence_against_compact_probes(circle, z1):
    z3 = build_Zg(circle, 1, THREE_ARCS)
    assert len(z3) == 3
    h = named(circle, "f")
    assert equal(Dot(z1.z_term, h), Dot(z3.z_term, h), CENTRAL, circle) is Verdict.EQUAL


def test_z1_equals_z(circle, z1):
    assert equal(z1.z_term, Z, CENTRAL, circle) is Verdict.EQUAL
    r = QuantumRealization(circle)
    assert r(z1.z_term) == r.scalar(r.iz)
    assert build_Z_compact(circle) == z1.z_term


def test_canonical_z(canonical2):
    assert normalize(canonical_Z(canonical2), CENTRAL, canonical2) == normalize(Z, CENTRAL, canonical2)
    q1, p2 = named(canonical2, "q1"), named(canonical2, "p2")
    assert normalize(commutator(q1, p2), CENTRAL, canonical2).is_zero()
    assert normalize(commutator(q1, q1), CENTRAL, canonical2).is_zero()


def test_line_has_no_global_z(line):
    with pytest.raises(NonCompactError):
        build_Z_compact(line)
    with pytest.raises(CoverError):
        build_Zg(line, 1)


def test_zero_g_gives_zero(circle, line):
    zc = build_Zg(circle, 0)
    assert len(zc) == 0 and normalize(zc.z_term, CENTRAL, circle).is_zero()
    with pytest.raises(CoverError):
        build_Zg(line, 0)


@pytest.mark.parametrize("backend", ["central", "quantum", "classical"])
def test_centrality_of_z1(z1, backend):
    rng = random.Random(1)
    probes = [S.generator(z1.pres, rng) for _ in range(4)] + [ONE_T]
    checks = verify_centrality(z1, probes, backend)
    assert checks and all(c.verdict == PASS for c in checks)


def test_centrality_by_replay(z1):
    circle = z1.pres
    for A in (named(circle, "v"), named(circle, "f")):
        s = lie_centrality_script(z1, A)
        assert s.valid(circle) and s.end == ZERO_T
        s = comm_centrality_script(z1, A)
        assert s.valid(circle) and s.end == ZERO_T


def test_decomposition_and_uniqueness_replay(circle, z1):
    s = decomposition_script(z1)
    assert s.valid(circle)
    z3 = build_Zg(circle, 1, THREE_ARCS)
    g = bump(CIRCLE, mpq(1, 4), mpq(5, 16), mpq(3, 8), mpq(7, 16))
    hc = build_Zg(circle, g)
    s = uniqueness_script(z1, z3, hc)
    assert s.valid(circle)
    assert s.check_ends(circle, CENTRAL)


def test_line_centrality_where_g_is_one(line):
    zc = build_Zg(line, bump(LINE, -3, -2, 2, 3))
    rng = random.Random(4)
    probes = [S.window_term(line, rng, -2, 2) for _ in range(3)]
    checks = verify_centrality(zc, probes, "quantum")
    assert all(c.verdict == PASS for c in checks)


def test_probe_violating_side_condition_is_flagged(line):
    zc = build_Zg(line, bump(LINE, -1, 0, 1, 2))
    (c,) = verify_centrality(zc, [named(line, "w")])
    assert c.verdict == FLAGGED


@given(seeds)
def test_relation_31_on_circle(seed):
    circle = pres("circle")
    rng = random.Random(seed)
    A, B = S.generator(circle, rng), S.generator(circle, rng)
    assert verify_relation_31(circle, A, B, "quantum").ok
    assert verify_relation_31(circle, A, A, "central").ok


def test_relation_31_current(current):
    A, B = named(current, "jv"), named(current, "rf")
    assert verify_relation_31(current, A, B, "quantum").ok


@given(seeds)
def test_localization_cases(seed):
    circle = pres("circle")
    rng = random.Random(seed)
    g, A = S.disjoint_case(circle, rng)
    assert all(c.ok for c in verify_localization(circle, g, A))
    g, A = S.plateau_case(circle, rng)
    assert all(c.ok for c in verify_localization(circle, g, A, ("central",)))


@pytest.fixture(scope="module")
def seq():
    return build_Z_sequence(pres("line"), nmax=4)


def test_stabilization_of_a_bump_in_k1(seq):
    line = seq.pres
    A = named(line, "f")  # supported in [0, 3/4]
    assert seq.nbar(A) == 0
    forms = [normalize(Dot(seq.z(n), A), CENTRAL, line) for n in range(1, 5)]
    assert forms[0] == forms[1] == forms[2] == forms[3]
    assert verify_stabilization(seq, A).ok


def test_one_is_not_localized(seq):
    assert seq.nbar(ONE_T) is None
    assert verify_stabilization(seq, ONE_T).verdict == FLAGGED


@pytest.mark.parametrize("seed", range(4))
def test_sequence_relation(seq, seed):
    A, B = S.localized_pair(seq.pres, random.Random(seed), reach=2)
    assert all(c.ok for c in verify_sequence_relation(seq, A, B))
