"""Homomorphism checks for the two realizations."""

from __future__ import annotations

import random

from poissonlr.cli.syntax import print_term
from poissonlr.engine.rules import RULES, RuleError, apply_rule, variants
from poissonlr.engine.normal import CENTRAL
from poissonlr.engine.terms import Dot, Lie, Star, positions, subterm
from poissonlr.report import check
from poissonlr.realize.classical import ClassicalRealization
from poissonlr.realize.quantum import QuantumRealization


def make_realization(pres, backend: str, z=None, alpha=None):
    if backend == "classical":
        return ClassicalRealization(pres)
    if backend == "quantum":
        return QuantumRealization(pres, *(() if z is None else (z,)), alpha=alpha)
    raise ValueError(f"unknown realization backend {backend!r}")


def check_homomorphism(pairs, realization) -> list:
    """Products, brackets and the involution, exactly, per pair."""
    r = realization
    out = []
    for A, B in pairs:
        a, b = r(A), r(B)
        label = f"{print_term(A)} ; {print_term(B)}"
        out.append(check(f"pi(A.B) = pi(A) pi(B) for {label}", r.backend, r(Dot(A, B)) == a * b))
        if r.backend == "quantum":
            ok = a.commutator(b) == r(Lie(A, B)).scale(r.iz)
            out.append(check(f"[pi(A), pi(B)] = i z pi({{A,B}}) for {label}", r.backend, ok))
            ok = r(Star(A)) == a.adjoint()
        else:
            ok = a.bracket(b) == r(Lie(A, B))
            out.append(check(f"{{pi(A), pi(B)}} = pi({{A,B}}) for {label}", r.backend, ok))
            ok = r(Star(A)) == a.conj()
        out.append(check(f"pi(A*) = pi(A)^+ for {label}", r.backend, ok))
    return out


def rule_instances(pres, rng: random.Random, count: int, depth=2):
    """Random ``(before, after, rule)`` triples, one rule application each."""
    from poissonlr.engine.terms import random_term

    rules = [r for r in RULES if r not in ("LR_JORDAN", "FUNC_MULT") or pres.lr_enabled]
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        t = random_term(pres, rng, depth)
        pos = rng.choice(list(positions(t)))
        sub = subterm(t, pos)
        rule = rng.choice(rules)
        vs = variants(rule, sub, pres, CENTRAL)
        if not vs:
            continue
        try:
            new = apply_rule(t, rule, pos, pres, rng.choice(vs), CENTRAL)
        except RuleError:
            continue
        out.append((t, new, rule))
    return out


def check_rule_instances(instances, realization) -> list:
    """Every rule application is an identity in the realization."""
    return [
        check(f"{rule}: {print_term(a)} -> {print_term(b)}", realization.backend,
              realization(a) == realization(b))
        for a, b, rule in instances
    ]
