"""Crossed products with rigid flows, Weyl relations and flow derivatives.

Only rigid flows are exact: ``v = c D`` with ``c`` rational (rotations of
the circle, translations of the line).  With ``T_v = c P_alpha`` the formal
unitary ``U_lam = exp(-i lam T_v)`` conjugates a function by the shift

    U_lam f U_lam^-1 = f(. + lam c z),

since ``ad_P = i z d/dx`` on functions.  An element of the crossed product
is ``sum A_(lam, mu) U_lam V_mu`` where ``A`` is a quantum element and
``V_mu = U(mu Z)`` is central (``Z`` is realized as the scalar ``i z``).
Numerical ``z`` must be rational so shifted breakpoints stay rational.
"""

from __future__ import annotations

import math
from math import factorial

from gmpy2 import mpq

from poissonlr.exact.piecewise import CIRCLE, PiecewiseFunction, VectorField, act, lie_bracket
from poissonlr.exact.presentation import Fn, Frame, Vf
from poissonlr.exact.scalar import Poly, as_q
from poissonlr.realize.quantum import I, QuantumElement, QuantumRealization


class RigidFlowError(ValueError):
    """The flow is not a rational multiple of the frame field."""


def rigid_speed(pres, v) -> mpq:
    """``c`` for ``v = c D``; accepts a rational, a payload or a field."""
    if isinstance(v, (int, mpq, str)):
        return as_q(v)
    if isinstance(v, Poly):
        c = v.rational()
        if c is None:
            raise RigidFlowError("flow speed must be a rational number")
        return c
    if isinstance(v, (Frame, Vf)):
        v = pres.field_of(v)
    if isinstance(v, VectorField):
        h = v.coefficient
        if h.is_constant() and h.constant_value().rational() is not None:
            return h.constant_value().rational()
        raise RigidFlowError(
            "only rational multiples of the frame field have exact flows "
            "(a non-constant field moves breakpoints to irrational positions)"
        )
    raise RigidFlowError(f"cannot read a rigid flow from {v!r}")


class CrossedElement:
    """``terms`` maps ``(lam, mu)`` to the quantum coefficient."""

    def __init__(self, flow: "RigidFlow", terms: dict):
        self.flow = flow
        self.terms = {k: a for k, a in terms.items() if not a.is_zero()}

    def __add__(self, other):
        out = dict(self.terms)
        for k, a in other.terms.items():
            out[k] = out[k] + a if k in out else a
        return CrossedElement(self.flow, out)

    def __sub__(self, other):
        return self + CrossedElement(self.flow, {k: -a for k, a in other.terms.items()})

    def __mul__(self, other):
        out = {}
        for (l1, m1), a in self.terms.items():
            for (l2, m2), b in other.terms.items():
                key = (l1 + l2, m1 + m2)
                prod = a * self.flow.conjugate(b, l1)
                out[key] = out[key] + prod if key in out else prod
        return CrossedElement(self.flow, out)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, CrossedElement) and self.terms == other.terms


class RigidFlow:
    def __init__(self, pres, v, z=1, alpha=0):
        if not pres.framed:
            raise RigidFlowError("rigid flows need a framed presentation")
        self.pres = pres
        self.c = rigid_speed(pres, v)
        self.z = as_q(z)
        self.quantum = QuantumRealization(pres, self.z, alpha)
        self.domain = pres.domain or CIRCLE

    def shift(self, lam) -> mpq:
        return as_q(lam) * self.c * self.z

    def conjugate(self, a: QuantumElement, lam) -> QuantumElement:
        """``U_lam a U_lam^-1``: coefficients translated, ``P`` fixed."""
        s = self.shift(lam)
        return QuantumElement(a.domain, {k: f.translate(s) for k, f in a.terms.items()}, a.z)

    # -- elements --------------------------------------------------------------
    def element(self, a: QuantumElement, lam=0, mu=0) -> CrossedElement:
        return CrossedElement(self, {(as_q(lam), as_q(mu)): a})

    def U(self, lam) -> CrossedElement:
        return self.element(self.quantum.scalar(1), lam, 0)

    def UZ(self, mu) -> CrossedElement:
        return self.element(self.quantum.scalar(1), 0, mu)

    def function(self, f: PiecewiseFunction) -> CrossedElement:
        return self.element(QuantumElement.function(f, self.quantum.z))

    # -- the series route ------------------------------------------------------
    def series_conjugate(self, f: PiecewiseFunction, lam) -> PiecewiseFunction:
        """``sum_n (-i lam)^n / n! ad_{T_v}^n f`` computed with quantum
        commutators, terminating on every piece, then relocated to the
        shifted intervals."""
        lam = as_q(lam)
        Tv = self.quantum.field_operator(PiecewiseFunction.constant(self.c, self.domain))
        term = QuantumElement.function(f, self.quantum.z)
        total = QuantumElement.zero(self.domain, self.quantum.z)
        n = 0
        while not term.is_zero():
            coeff = (-(I * lam)) ** n * Poly.const(mpq(1, factorial(n)))
            total = total + term.scale(coeff)
            term = Tv.commutator(term)
            n += 1
            if set(term.terms) - {0}:
                raise AssertionError("ad_T maps functions outside the functions")
        g = total.terms.get(0, PiecewiseFunction.constant(0, self.domain))
        return relocate(g, self.shift(lam))


def relocate(g: PiecewiseFunction, s) -> PiecewiseFunction:
    """Move each piece of ``g`` from ``(a, b)`` to ``(a - s, b - s)``; the
    piece polynomials are already expressed in the new coordinate."""
    s = as_q(s)
    if g.domain != CIRCLE:
        return PiecewiseFunction._raw(g.domain, [b - s for b in g.breaks], g.pieces, g.smoothness)
    cuts = []
    for lo, hi, p in g.intervals():
        cuts.append((lo - s, hi - s, p))
    out_breaks, out_pieces = [], []
    pts = sorted({((lo % 1) + 1) % 1 for lo, _, _ in cuts} | {mpq(0)})
    ends = pts[1:] + [mpq(1)]
    for lo, hi in zip(pts, ends):
        mid = (lo + hi) / 2
        for a, b, p in cuts:
            k = _lift(mid, a, b)
            if k is not None:
                out_breaks.append(lo)
                out_pieces.append(p.shift(k))
                break
    return PiecewiseFunction._raw(CIRCLE, out_breaks, out_pieces, g.smoothness)


def _lift(t, a, b):
    """Integer ``k`` with ``a < t + k < b`` or None."""
    k = math.ceil(a - t)
    if a < t + k < b:
        return k
    if a < t + k + 1 < b:
        return k + 1
    return None


def weyl_relation_check(pres, lam, f: PiecewiseFunction, v, z=1, alpha=0) -> dict:
    """``U_lam f = (shifted f) U_lam`` with the shift read off the series."""
    flow = RigidFlow(pres, v, z, alpha)
    lhs = flow.U(lam) * flow.function(f)
    shifted = flow.series_conjugate(f, lam)
    rhs = flow.function(shifted) * flow.U(lam)
    direct = f.translate(flow.shift(lam))
    uz = flow.UZ(as_q(lam) + 1)
    central = (flow.U(lam) * uz == uz * flow.U(lam)) and (uz * flow.function(f) == flow.function(f) * uz)
    return {
        "relation": lhs == rhs,
        "series_matches_translation": shifted == direct,
        "uz_central": central,
        "shift": flow.shift(lam),
    }


def group_law_check(pres, lam, mu, v, z=1) -> bool:
    flow = RigidFlow(pres, v, z)
    return flow.U(lam) * flow.U(mu) == flow.U(as_q(lam) + as_q(mu)) and flow.U(0) == flow.element(flow.quantum.scalar(1))


LAM = Poly.var("lam")


def _first_order(p: Poly, c) -> Poly:
    """Coefficient of ``lam`` in ``p(x + lam c)``."""
    cs = p.subs("x", Poly.var("x") + LAM * Poly.const(c)).coeffs("lam")
    return cs[1] if len(cs) > 1 else Poly()


def flow_derivative_check(pres, v, payload) -> dict:
    """d/dlam at 0 of the generator pulled back along the flow of ``v``,
    piece by piece, against ``{v, A}``."""
    c = rigid_speed(pres, v)
    field = VectorField(PiecewiseFunction.constant(c, pres.domain or CIRCLE), check=False)
    if payload is None:
        return {"ok": True, "pieces": 0}
    if isinstance(payload, Fn):
        base = payload.f
        expected = act(field, base)
    elif isinstance(payload, (Vf, Frame)):
        base = pres.field_of(payload).coefficient
        expected = lie_bracket(field, VectorField(base, check=False)).coefficient
    else:
        raise TypeError("flow derivatives are defined for function and field generators")
    ok = True
    n = 0
    for lo, hi, p in base.intervals():
        mid = _midpoint(lo, hi)
        n += 1
        if _first_order(p, c) != expected.piece_at(mid):
            ok = False
    return {"ok": ok, "pieces": n}


def _midpoint(lo, hi):
    if lo is None and hi is None:
        return mpq(0)
    if lo is None:
        return hi - 1
    if hi is None:
        return lo + 1
    return (lo + hi) / 2


__all__ = [
    "RigidFlow", "RigidFlowError", "CrossedElement", "weyl_relation_check",
    "group_law_check", "flow_derivative_check", "relocate", "rigid_speed",
]
