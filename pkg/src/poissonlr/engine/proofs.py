"""Replayable proof scripts.

A script is a start term, an end term and a list of single rule
applications.  A forward step applies a rule at a position.  A backward
step replaces the subterm ``s`` at a position by a *witness* ``w`` such that
the forward application of the rule at the root of ``w`` gives exactly
``s``; this is how a chain of equalities is read from right to left.  Every
step stores the subterm before and after, so a script can be reversed and
embedded at any position of a larger term.

``Scripter`` builds scripts step by step; ``derive_farkas`` produces the
derivation of ``[A,B].{C,D} = {A,B}.[C,D]`` from the Leibniz rule and
linearity alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from poissonlr.engine.normal import CENTRAL, FREE, normalize
from poissonlr.engine.rules import RuleError, apply_at_root, variants
from poissonlr.engine.terms import Dot, Lie, Sum, Term, commutator, replace, subterm
from poissonlr.exact.scalar import ONE


class ProofError(ValueError):
    """A script could not be built (no connecting path was found)."""


class ReplayError(ValueError):
    def __init__(self, index, msg):
        self.index = index
        super().__init__(f"step {index}: {msg}")


@dataclass(frozen=True)
class ProofStep:
    rule: str
    position: tuple
    arg: object
    direction: str  # "fwd" or "back"
    before: Term
    after: Term

    def reversed(self) -> "ProofStep":
        d = "back" if self.direction == "fwd" else "fwd"
        return ProofStep(self.rule, self.position, self.arg, d, self.after, self.before)

    def shifted(self, prefix: tuple) -> "ProofStep":
        return ProofStep(self.rule, prefix + self.position, self.arg, self.direction,
                         self.before, self.after)


@dataclass(frozen=True)
class ProofScript:
    start: Term
    end: Term
    steps: tuple
    mode: str = FREE
    name: str = ""

    def __len__(self):
        return len(self.steps)

    def rules_used(self) -> set:
        return {s.rule for s in self.steps}

    def replay(self, pres) -> Term:
        """Re-check every step from ``start``; returns the final term."""
        t = self.start
        for i, s in enumerate(self.steps):
            try:
                sub = subterm(t, s.position)
            except IndexError as exc:
                raise ReplayError(i, f"bad position {s.position}: {exc}") from None
            try:
                if s.direction == "fwd":
                    new = apply_at_root(sub, s.rule, s.arg, pres, self.mode)
                else:
                    if apply_at_root(s.after, s.rule, s.arg, pres, self.mode) != sub:
                        raise ReplayError(i, f"witness of backward {s.rule} does not rewrite to the subterm")
                    new = s.after
            except RuleError as exc:
                raise ReplayError(i, str(exc)) from None
            t = replace(t, s.position, new)
        if t != self.end:
            raise ReplayError(len(self.steps), "replay does not end at the recorded end term")
        return t

    def valid(self, pres) -> bool:
        try:
            self.replay(pres)
        except ReplayError:
            return False
        return True

    def reversed(self) -> "ProofScript":
        steps = tuple(s.reversed() for s in reversed(self.steps))
        return ProofScript(self.end, self.start, steps, self.mode, self.name)

    def then(self, other: "ProofScript") -> "ProofScript":
        if self.end != other.start:
            raise ProofError("scripts do not chain: end and start differ")
        return ProofScript(self.start, other.end, self.steps + other.steps, self.mode,
                           self.name or other.name)

    def check_ends(self, pres, mode=CENTRAL) -> bool:
        """Do start and end have the same normal form?"""
        return normalize(self.start, mode, pres) == normalize(self.end, mode, pres)

    def record(self, names=None) -> dict:
        from poissonlr.cli.syntax import print_term

        return {
            "name": self.name,
            "mode": self.mode,
            "start": print_term(self.start, names),
            "end": print_term(self.end, names),
            "steps": [
                {"rule": s.rule, "position": list(s.position), "arg": s.arg,
                 "direction": s.direction}
                for s in self.steps
            ],
        }


# ---------------------------------------------------------------------------
# building scripts

STRUCTURAL = (
    ("LINEAR", "flat"), ("LINEAR", "dl"), ("LINEAR", "dr"), ("LINEAR", "ll"),
    ("LINEAR", "lr"), ("ASSOC", "right"),
)
EXPAND = STRUCTURAL + (("IDENT", "left"), ("IDENT", "right"), ("LEIBNIZ", "right"),
                       ("LEIBNIZ", "left"), ("LIE_HOM", "gen"))


def _preorder(t, pos=()):
    yield pos, t
    for i, k in enumerate(t.children()):
        yield from _preorder(k, pos + (i,))


@dataclass
class Scripter:
    """Mutable builder: ``t`` is the current end of the script."""

    pres: object
    start: Term
    mode: str = FREE
    name: str = ""
    steps: list = field(default_factory=list)

    def __post_init__(self):
        self.t = self.start

    def at(self, pos=()) -> Term:
        return subterm(self.t, tuple(pos))

    def fwd(self, rule, pos=(), arg=None):
        pos = tuple(pos)
        sub = subterm(self.t, pos)
        vs = variants(rule, sub, self.pres, self.mode)
        if arg is None and vs:
            arg = vs[0]
        new = apply_at_root(sub, rule, arg, self.pres, self.mode)
        self.steps.append(ProofStep(rule, pos, arg, "fwd", sub, new))
        self.t = replace(self.t, pos, new)
        return self

    def back(self, rule, witness: Term, pos=(), arg=None):
        pos = tuple(pos)
        sub = subterm(self.t, pos)
        vs = variants(rule, witness, self.pres, self.mode)
        if arg is None and vs:
            arg = vs[0]
        if apply_at_root(witness, rule, arg, self.pres, self.mode) != sub:
            raise ProofError(f"backward {rule}: witness does not rewrite to the subterm at {pos}")
        self.steps.append(ProofStep(rule, pos, arg, "back", sub, witness))
        self.t = replace(self.t, pos, witness)
        return self

    def embed(self, script: ProofScript, pos=()):
        pos = tuple(pos)
        if subterm(self.t, pos) != script.start:
            raise ProofError(f"embedded script does not start at the subterm at {pos}")
        self.steps.extend(s.shifted(pos) for s in script.steps)
        self.t = replace(self.t, pos, script.end)
        return self

    def drive(self, pos=(), table=STRUCTURAL):
        """Deterministic exhaustive rewriting below ``pos`` with ``table``,
        then collect and sort the top sum.  The result is a canonical
        sum of monomials over the atoms ``table`` leaves untouched."""
        pos = tuple(pos)
        while True:
            hit = None
            for p, sub in _preorder(subterm(self.t, pos)):
                for rule, arg in table:
                    if arg in variants(rule, sub, self.pres, self.mode):
                        hit = (p, rule, arg)
                        break
                if hit:
                    break
            if hit is None:
                break
            self.fwd(hit[1], pos + hit[0], hit[2])
        for arg in ("collect", "sort"):
            if arg in variants("LINEAR", self.at(pos), self.pres, self.mode):
                self.fwd("LINEAR", pos, arg)
        if "unwrap" in variants("LINEAR", self.at(pos), self.pres, self.mode):
            self.fwd("LINEAR", pos, "unwrap")
        return self

    def script(self) -> ProofScript:
        return ProofScript(self.start, self.t, tuple(self.steps), self.mode, self.name)

    def connect(self, target: Term, table=STRUCTURAL):
        """Drive the current term and ``target`` to canonical form and, when
        they agree, append the target's path read backwards."""
        if self.t == target:
            return self
        self.drive((), table)
        other = Scripter(self.pres, target, self.mode)
        other.drive((), table)
        if other.t != self.t:
            raise ProofError("terms do not meet under the structural rules")
        for s in reversed(other.steps):
            self.steps.append(s.reversed())
        self.t = target
        return self


def chain(pres, start: Term, scripts, mode=FREE, name="") -> ProofScript:
    s = ProofScript(start, start, (), mode, name)
    for x in scripts:
        s = s.then(x)
    return ProofScript(s.start, s.end, s.steps, mode, name)


# ---------------------------------------------------------------------------
# the four-term identity


def farkas_sides(A, B, C, D):
    """``([A,B].{C,D}, {A,B}.[C,D])``."""
    return Dot(commutator(A, B), Lie(C, D)), Dot(Lie(A, B), commutator(C, D))


def derive_farkas(A: Term, B: Term, C: Term, D: Term, pres) -> ProofScript:
    """Derive ``[A,B].{C,D} = {A,B}.[C,D]`` by expanding ``W = {A.C, B.D}``
    in two ways (left factor first, right factor first) and cancelling.

    Only LEIBNIZ, LINEAR and ASSOC are used.
    """
    S, E = farkas_sides(A, B, C, D)
    W = Lie(Dot(A, C), Dot(B, D))
    sc = Scripter(pres, S, FREE, "farkas")
    sc.back("LINEAR", Sum(((ONE, S),)), (), "unwrap")
    sc.back("LINEAR", Sum(((ONE, S), (-ONE, W), (ONE, W))), (), "collect")
    # way 1: {A.C, B.D} = A.{C, B.D} + {A, B.D}.C
    sc.fwd("LEIBNIZ", (1,), "left")
    sc.fwd("LEIBNIZ", (1, 0, 1), "right")
    sc.fwd("LEIBNIZ", (1, 1, 0), "right")
    # way 2: {A.C, B.D} = {A.C, B}.D + B.{A.C, D}
    sc.fwd("LEIBNIZ", (2,), "right")
    sc.fwd("LEIBNIZ", (2, 0, 0), "left")
    sc.fwd("LEIBNIZ", (2, 1, 1), "left")
    sc.connect(E)
    return sc.script()
