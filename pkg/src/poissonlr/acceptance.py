"""Acceptance criteria 1-9, shared by ``poissonlr selftest`` and the test suite.

Each criterion is a function ``(seed) -> Outcome``; every comparison is
exact equality.  ``run_criteria`` times them against their budgets.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field

from gmpy2 import mpq

from poissonlr import sampling as S
from poissonlr.central import (
    build_Z_compact, build_Z_sequence, build_Zg, term_support, verify_centrality,
    verify_relation_31, verify_sequence_relation, verify_stabilization,
)
from poissonlr.cli.syntax import ParseError, generator_names, parse_expression, print_term
from poissonlr.engine.normal import CENTRAL, Verdict, equal, normalize, quotient_z
from poissonlr.engine.proofs import derive_farkas
from poissonlr.engine.rules import readback, rewrite
from poissonlr.engine.terms import Dot, Gen, Lie, Star, Z, ZERO_T, commutator, gen, named, random_term
from poissonlr.exact.piecewise import CIRCLE, PiecewiseFunction, act, lie_bracket, lr_product
from poissonlr.exact.presentation import Fn, Sym, builtin
from poissonlr.exact.scalar import ONE, Poly
from poissonlr.realize.classical import ClassicalRealization
from poissonlr.realize.crossed import flow_derivative_check, group_law_check, weyl_relation_check
from poissonlr.realize.quantum import ALPHA, I, ZVAR, QuantumElement, QuantumRealization

HBAR = Poly.var("hbar")


@dataclass
class Outcome:
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float
    detail: dict

    @property
    def ok(self) -> bool:
        return self.passed and self.seconds < self.budget

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        extra = "" if self.passed else f" ({self.detail.get('failure', 'check failed')})"
        over = "" if self.seconds < self.budget else " (over budget)"
        return f"{tag} criterion {self.number} [{self.name}] {self.seconds:.2f}s / {self.budget:g}s{extra}{over}"

    def record(self) -> dict:
        return {
            "number": self.number, "name": self.name, "verdict": "PASS" if self.ok else "FAIL",
            "budget_seconds": self.budget, "detail": self.detail,
        }


def _fail(**detail) -> Outcome:
    return Outcome(False, detail)


# ---------------------------------------------------------------------------
# 1. canonical quantization


def weyl_oracle(word, hbar=HBAR) -> dict:
    """Brute-force normal ordering by single adjacent swaps.

    ``word`` is a sequence of ``(letter, index)``; symbols of different
    indices commute and ``p_i q_i = q_i p_i - i hbar``.  Returns
    ``{sorted word: coefficient}`` with every ``q`` before every ``p``.
    """
    rank = lambda s: (s[0] == "p", s[1])  # noqa: E731
    todo = {tuple(word): ONE}
    done = {}
    while todo:
        w, c = todo.popitem()
        for j in range(len(w) - 1):
            if rank(w[j]) > rank(w[j + 1]):
                swapped = w[:j] + (w[j + 1], w[j]) + w[j + 2:]
                todo[swapped] = todo.get(swapped, Poly()) + c
                if w[j][0] == "p" and w[j + 1][0] == "q" and w[j][1] == w[j + 1][1]:
                    shorter = w[:j] + w[j + 2:]
                    todo[shorter] = todo.get(shorter, Poly()) - c * I * hbar
                break
        else:
            done[w] = done.get(w, Poly()) + c
    return {w: c for w, c in done.items() if c}


def _word_term(pres, word):
    t = Gen(Sym(*word[0]), pres.tag)
    for s in word[1:]:
        t = Dot(t, Gen(Sym(*s), pres.tag))
    return t


def _quotient_nf(pres, t, z):
    """Normal form in the quotient ``Z = i z``: normalize, substitute, normalize."""
    return normalize(quotient_z(normalize(t, CENTRAL, pres).to_term(), z), CENTRAL, pres)


def criterion_1(seed=0) -> Outcome:
    pres = builtin("canonical2")
    q = [named(pres, f"q{i}") for i in (1, 2)]
    p = [named(pres, f"p{i}") for i in (1, 2)]
    for i in range(2):
        for j in range(2):
            want = Z if i == j else ZERO_T
            if normalize(commutator(q[i], p[j]), CENTRAL, pres) != normalize(want, CENTRAL, pres):
                return _fail(failure=f"[q{i + 1}, p{j + 1}] is not delta Z")
    gens = q + p
    for a in gens:
        for b in gens:
            if not _quotient_nf(pres, commutator(a, b), 0).is_zero():
                return _fail(failure="a commutator survives z = 0")
    rng = random.Random(seed)
    letters = [("q", 1), ("q", 2), ("p", 1), ("p", 2)]
    for _ in range(100):
        word = [rng.choice(letters) for _ in range(rng.randint(1, 5))]
        nf = _quotient_nf(pres, _word_term(pres, word), HBAR)
        got = {}
        for (w, m), c in nf.terms:
            if m:
                return _fail(failure="Z left after the quotient")
            got[tuple((s.letter, s.index) for s in w)] = c
        if got != weyl_oracle(word):
            return _fail(failure=f"word {word} disagrees with the reordering oracle")
    return Outcome(True, {"words": 100})


# ---------------------------------------------------------------------------
# 2. compact case


def criterion_2(seed=0) -> Outcome:
    pres = builtin("circle")
    z1 = build_Z_compact(pres)
    if equal(z1, Z, CENTRAL, pres) != Verdict.EQUAL:
        return _fail(failure="Z_1 differs from Z")
    rng = random.Random(seed)
    pairs = S.generator_pairs(pres, rng, 50)
    for backend in ("quantum", "classical"):
        for A, B in pairs:
            c = verify_relation_31(pres, A, B, backend)
            if not c.ok:
                return _fail(failure=c.statement, backend=backend)
    return Outcome(True, {"pairs": 50, "backends": ["quantum", "classical"]})


# ---------------------------------------------------------------------------
# 3. non-compact case


def criterion_3(seed=0) -> Outcome:
    pres = builtin("line")
    seq = build_Z_sequence(pres, nmax=4)
    rng = random.Random(seed)
    nbars = []
    for _ in range(20):
        A = S.localized_probe(pres, rng, reach=4)
        c = verify_stabilization(seq, A)
        if not c.ok:
            return _fail(failure=c.statement, witness=c.witness)
        nbars.append(int(c.witness["nbar"]))
    checked = 0
    for _ in range(20):
        A, B = S.localized_pair(pres, rng, reach=3)
        for c in verify_sequence_relation(seq, A, B):
            if not c.ok:
                return _fail(failure=c.statement)
            checked += 1
    return Outcome(True, {"probes": 20, "nbar_histogram": {str(k): nbars.count(k) for k in sorted(set(nbars))},
                          "pairs": 20, "checks": checked})


# ---------------------------------------------------------------------------
# 4. Farkas identity


FARKAS_PRESENTATIONS = ("circle", "line", "canonical2", "current-circle")


def criterion_4(seed=0) -> Outcome:
    rng = random.Random(seed)
    steps = {}
    for name in FARKAS_PRESENTATIONS:
        pres = builtin(name)
        total = 0
        for _ in range(25):
            A, B, C, D = (S.generator(pres, rng) for _ in range(4))
            s = derive_farkas(A, B, C, D, pres)
            if not s.valid(pres):
                return _fail(failure=f"replay failed on {name}")
            if not s.check_ends(pres, CENTRAL):
                return _fail(failure=f"ends disagree in CENTRAL mode on {name}")
            if "FARKAS" in s.rules_used():
                return _fail(failure="the derivation used the identity it derives")
            total += len(s)
        steps[name] = total
    return Outcome(True, {"quadruples_per_presentation": 25, "steps": steps})


# ---------------------------------------------------------------------------
# 5. localization


def _realizations(pres):
    return [ClassicalRealization(pres), QuantumRealization(pres)]


def supports_disjoint(pres, g: PiecewiseFunction, A) -> bool:
    """Closed supports of ``g`` and ``A`` do not meet (interval arithmetic)."""
    sa = term_support(pres, A)
    if sa is None:
        return False
    shifts = (-1, 0, 1) if g.domain == CIRCLE else (0,)
    for a, b in g.support():
        for c, d in sa:
            if any(a <= d + n and c + n <= b for n in shifts):
                return False
    return True


def criterion_5(seed=0) -> Outcome:
    rng = random.Random(seed)
    count = 0
    for name in ("circle", "line"):
        pres = builtin(name)
        reals = _realizations(pres)
        for _ in range(15):
            g, A = S.disjoint_case(pres, rng)
            if not supports_disjoint(pres, g, A):
                return _fail(failure="sampler produced overlapping supports")
            gt = gen(pres, Fn(g))
            for t in (Dot(gt, A), Dot(A, gt)):
                if not normalize(t, CENTRAL, pres).is_zero():
                    return _fail(failure=f"{print_term(t)} does not vanish")
                for r in reals:
                    if not r(t).is_zero():
                        return _fail(failure=f"{r.backend} image does not vanish")
            g, A = S.plateau_case(pres, rng)
            gt = gen(pres, Fn(g))
            nfa = normalize(A, CENTRAL, pres)
            if normalize(Dot(gt, A), CENTRAL, pres) != nfa or normalize(Dot(A, gt), CENTRAL, pres) != nfa:
                return _fail(failure="g = 1 on the support does not fix A")
            count += 1
    return Outcome(True, {"disjoint_cases": count, "plateau_cases": count})


# ---------------------------------------------------------------------------
# 6. current algebra


def criterion_6(seed=0) -> Outcome:
    pres = builtin("current-circle")
    zc = build_Zg(pres, 1)
    if pres.lr_enabled:
        return _fail(failure="LR relations are enabled")
    bad = [c.statement for c in zc.validate() if not c.ok]
    if bad:
        return _fail(failure=bad[0])
    rng = random.Random(seed)
    pairs = S.generator_pairs(pres, rng, 20)
    for A, B in pairs:
        c = verify_relation_31(pres, A, B, "quantum", zc=zc)
        if not c.ok:
            return _fail(failure=c.statement)
    probes = [a for a, _ in pairs[:10]]
    for c in verify_centrality(zc, probes, "quantum"):
        if not c.ok:
            return _fail(failure=c.statement)
    if pres.lr_enabled:
        return _fail(failure="LR relations were switched on")
    return Outcome(True, {"pairs": 20, "centrality_probes": len(probes), "lr_enabled": False})


# ---------------------------------------------------------------------------
# 7. quantum relations


def criterion_7(seed=0) -> Outcome:
    rng = random.Random(seed)
    n = 0
    for name in ("circle", "line"):
        pres = builtin(name)
        R = QuantumRealization(pres, ZVAR, ALPHA)
        iz = I * ZVAR
        half = Poly.const(mpq(1, 2))
        for _ in range(25):
            v, w = pres.random_field(rng), pres.random_field(rng)
            f = pres.random_function(rng)
            Tv, Tw = R.field_operator(v.coefficient), R.field_operator(w.coefficient)
            F = QuantumElement.function(f, ZVAR)
            if Tv.commutator(Tw) != R.field_operator(lie_bracket(v, w).coefficient).scale(iz):
                return _fail(failure="[T_v, T_w] != iz T_{v,w}")
            if Tv.commutator(F) != QuantumElement.function(act(v, f), ZVAR).scale(iz):
                return _fail(failure="[T_v, f] != iz {v, f}")
            if R.field_operator(lr_product(f, v).coefficient) != (F * Tv + Tv * F).scale(half):
                return _fail(failure="T_{f o v} != (f T_v + T_v f) / 2")
            if Tv.adjoint() != Tv:
                return _fail(failure="T_v is not formally self-adjoint")
            n += 1
    return Outcome(True, {"instances": n, "parameters": ["z", "alpha"]})


# ---------------------------------------------------------------------------
# 8. Weyl relation and flows


def criterion_8(seed=0) -> Outcome:
    rng = random.Random(seed)
    n = 0
    for name in ("circle", "line"):
        pres = builtin(name)
        for _ in range(10):
            lam, c, z, f, w = S.rigid_instance(pres, rng)
            res = weyl_relation_check(pres, lam, f, c, z)
            if not (res["relation"] and res["series_matches_translation"] and res["uz_central"]):
                return _fail(failure=f"crossed-product identity fails for lam={lam}, c={c}", result=str(res))
            if not group_law_check(pres, lam, mpq(rng.randint(-4, 4), 3), c, z):
                return _fail(failure="U_lam U_mu != U_(lam+mu)")
            for payload in (Fn(f), w):
                d = flow_derivative_check(pres, c, payload)
                if not d["ok"]:
                    return _fail(failure="flow derivative disagrees with the Lie action")
            n += 1
    return Outcome(True, {"instances": n})


# ---------------------------------------------------------------------------
# 9. engine health


CONFLUENCE_PRESENTATIONS = ("circle", "line", "canonical2", "current-circle")


def _leaves(pres):
    out = [named(pres, k) for k in sorted(pres.named)]
    if pres.frame:
        out.append(Gen(pres.frame[0], pres.tag))
    return out


def confluence_spot_check(seed=0, terms=200, orders=5) -> Outcome:
    """Random rewrite orders reach one normal form.

    Where CENTRAL forms are canonical the read-back forms must be
    identical and equal to ``normalize``.  The current algebra only has
    order-only forms (linear combinations of ``rho`` are not merged), so
    there the irreducible terms are compared through the quantum image.
    """
    rng = random.Random(seed)
    per = terms // len(CONFLUENCE_PRESENTATIONS)
    for name in CONFLUENCE_PRESENTATIONS:
        pres = builtin(name)
        leaves = _leaves(pres)
        canonical = normalize(ZERO_T, CENTRAL, pres).canonical
        image = None if canonical else QuantumRealization(pres)
        for _ in range(per):
            t = random_term(pres, rng, 2, leaves=leaves)
            forms = set()
            for _ in range(orders):
                irr, _ = rewrite(t, pres, CENTRAL, random.Random(rng.random()))
                if canonical:
                    forms.add(readback(irr, pres, CENTRAL))
                else:
                    forms.add(image(irr))
            if len(forms) != 1:
                return _fail(failure=f"rewrite orders disagree on {print_term(t, generator_names(pres))}")
            if canonical and forms.pop() != normalize(t, CENTRAL, pres):
                return _fail(failure=f"rewriting disagrees with normalize on {print_term(t)}")
            if not canonical and forms.pop() != image(t):
                return _fail(failure=f"rewriting changes the quantum image of {print_term(t)}")
    return Outcome(True, {"terms": per * len(CONFLUENCE_PRESENTATIONS), "orders": orders})


def _comparator(pres):
    """Exact equality of two terms: CENTRAL normal forms where they are
    canonical, the quantum image otherwise."""
    if normalize(ZERO_T, CENTRAL, pres).canonical:
        return lambda a, b: normalize(a, CENTRAL, pres) == normalize(b, CENTRAL, pres)
    image = QuantumRealization(pres)
    return lambda a, b: image(a) == image(b)


def algebra_identities(seed=0, count=40) -> Outcome:
    """Idempotence of normalize and the star anti-automorphism laws."""
    rng = random.Random(seed)
    for name in CONFLUENCE_PRESENTATIONS:
        pres = builtin(name)
        leaves = _leaves(pres)
        same = _comparator(pres)
        for _ in range(count):
            A = random_term(pres, rng, 2, leaves=leaves)
            B = random_term(pres, rng, 1, leaves=leaves)
            n = normalize(A, CENTRAL, pres)
            if normalize(n.to_term(), CENTRAL, pres) != n:
                return _fail(failure=f"normalize is not idempotent on {print_term(A)}")
            if not same(Star(Star(A)), A):
                return _fail(failure="star is not an involution")
            if not same(Star(Dot(A, B)), Dot(Star(B), Star(A))):
                return _fail(failure="star does not reverse products")
            if not same(Star(Lie(A, B)), Lie(Star(A), Star(B))):
                return _fail(failure="star does not preserve the Lie product")
    return Outcome(True, {"terms_per_presentation": count})


_FUZZ_ALPHABET = list("{}[](),.+-/ 0123456789i<>:;") + [
    "star(", "jordan(", "fn<", "vec<", "Z", "f", "g", "v", "w", "D", "x", "q", "p", "1", "unknown",
]


def parser_fuzz(seed=0, count=10_000) -> Outcome:
    """Random and mutated inputs either parse or raise a parse-level error."""
    rng = random.Random(seed)
    pres = builtin("circle")
    seeds = [print_term(random_term(pres, rng, 2, leaves=_leaves(pres))) for _ in range(20)]
    parsed = 0
    for k in range(count):
        if k % 2:
            s = list(rng.choice(seeds))
            for _ in range(rng.randint(1, 4)):
                i = rng.randrange(len(s) + 1)
                op = rng.random()
                if op < 0.4 and s:
                    del s[min(i, len(s) - 1)]
                else:
                    s.insert(i, rng.choice(_FUZZ_ALPHABET))
            text = "".join(s)
        else:
            text = "".join(rng.choice(_FUZZ_ALPHABET) for _ in range(rng.randint(0, 24)))
        try:
            parse_expression(text, pres)
            parsed += 1
        except (ParseError, KeyError, ValueError):
            pass
        except Exception as exc:  # noqa: BLE001 - any other exception is a crash
            return _fail(failure=f"{type(exc).__name__} on {text!r}")
    return Outcome(True, {"inputs": count, "parsed": parsed})


def report_determinism(seed=0) -> Outcome:
    from poissonlr.cli.main import emit_report, run

    argv = ["verify", "thm31", "--presentation", "circle", "--samples", "5", "--seed", str(seed),
            "--format", "json"]
    a = emit_report(run(argv)[0], "json")
    b = emit_report(run(argv)[0], "json")
    json.loads(a)
    return Outcome(a == b, {"bytes": len(a)} if a == b else {"failure": "JSON reports differ"})


def criterion_9(seed=0) -> Outcome:
    detail = {}
    for label, fn in (
        ("confluence", confluence_spot_check), ("identities", algebra_identities),
        ("parser_fuzz", parser_fuzz), ("determinism", report_determinism),
    ):
        out = fn(seed)
        detail[label] = out.detail
        if not out.passed:
            return _fail(failure=f"{label}: {out.detail.get('failure')}", **detail)
    return Outcome(True, detail)


# ---------------------------------------------------------------------------

CRITERIA = {
    1: ("canonical-quantization", criterion_1, 10),
    2: ("thm31-compact", criterion_2, 60),
    3: ("thm31-noncompact", criterion_3, 60),
    4: ("farkas", criterion_4, 30),
    5: ("localization", criterion_5, 20),
    6: ("current-algebra", criterion_6, 60),
    7: ("quantum-relations", criterion_7, 30),
    8: ("weyl-flow", criterion_8, 20),
    9: ("engine-health", criterion_9, 120),
}

ALIASES = {"thm31": (2, 3), "weyl": (1, 8), "flow": (8,), "engine": (9,), "current": (6,)}


def select(only=None) -> list:
    """Criterion numbers for ``--only`` (numbers, names or aliases)."""
    if not only:
        return sorted(CRITERIA)
    out = []
    for item in only:
        item = item.strip()
        if item.isdigit() and int(item) in CRITERIA:
            out.append(int(item))
        elif item in ALIASES:
            out.extend(ALIASES[item])
        else:
            hits = [k for k, (name, _, _) in CRITERIA.items() if name == item]
            if not hits:
                raise ValueError(f"unknown criterion {item!r}")
            out.extend(hits)
    return sorted(set(out))


def run_criterion(number: int, seed=0) -> Result:
    name, fn, budget = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        out = fn(seed)
    except Exception as exc:  # noqa: BLE001 - reported as a failure
        out = _fail(failure=f"{type(exc).__name__}: {exc}")
    return Result(number, name, out.passed, time.perf_counter() - t0, budget, out.detail)


def run_criteria(only=None, seed=0) -> list:
    return [run_criterion(n, seed) for n in select(only)]
