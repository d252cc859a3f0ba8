"""Quantum realization: normal-ordered skew polynomials.

For the circle and the line an element is ``sum_k f_k P^k`` with the
momentum ``P`` to the right.  The only reordering rule is

    P f = f P + i z f'

so that ``[P, f] = i z f'``.  A vector field ``v = h d/dx`` is realized as
``T_v = h P_a + (i z / 2) h'`` with ``P_a = P + z alpha``; ``alpha`` labels
the theta-angle family on the circle and is kept as a formal parameter.

For the canonical algebra an element is a polynomial in ``Q_i`` and
``P_i`` with every ``Q`` to the left, reordered by ``P_i Q_i = Q_i P_i - i z``.

The map on terms first removes Lie nodes and stars with the structural
expansion of ``engine.normal.lie_free`` and then sends generators to the
operators above, so brackets and adjoints of realized elements are
genuinely independent of the term-level computation.
"""

from __future__ import annotations

from math import comb, factorial

from gmpy2 import mpq

from poissonlr.exact.piecewise import CIRCLE, PiecewiseFunction
from poissonlr.exact.presentation import Cur, Fn, Frame, Rho, Sym, Vf
from poissonlr.exact.scalar import ONE, Poly

I = Poly.var("i")
ZVAR = Poly.var("z")
ALPHA = Poly.var("alpha")


class QuantumElement:
    """``sum_k f_k P^k``; ``terms`` maps ``k`` to a piecewise function."""

    __slots__ = ("domain", "terms", "z")

    def __init__(self, domain, terms: dict, z: Poly = ZVAR):
        self.domain = domain
        self.z = z
        self.terms = {k: f for k, f in terms.items() if not f.is_zero()}

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, domain, z=ZVAR):
        return cls(domain, {}, z)

    @classmethod
    def scalar(cls, c, domain, z=ZVAR):
        return cls(domain, {0: PiecewiseFunction.constant(c, domain)}, z)

    @classmethod
    def function(cls, f: PiecewiseFunction, z=ZVAR):
        return cls(f.domain, {0: f}, z)

    @classmethod
    def momentum(cls, domain, z=ZVAR):
        return cls(domain, {1: PiecewiseFunction.constant(1, domain)}, z)

    def _new(self, terms):
        return QuantumElement(self.domain, terms, self.z)

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        out = dict(self.terms)
        for k, f in other.terms.items():
            out[k] = out[k] + f if k in out else f
        return self._new(out)

    def __neg__(self):
        return self._new({k: -f for k, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Poly.coerce(c)
        return self._new({k: f * c for k, f in self.terms.items()})

    def __mul__(self, other):
        iz = I * self.z
        out = {}
        for a, f in self.terms.items():
            for b, g in other.terms.items():
                # f P^a g P^b = sum_j C(a,j) (iz)^j f g^(j) P^(a-j+b)
                dg = g
                for j in range(a + 1):
                    if j:
                        dg = dg.derivative(strict=False)
                        if dg.is_zero():
                            break
                    term = f * dg * (Poly.const(comb(a, j)) * iz ** j)
                    k = a - j + b
                    out[k] = out[k] + term if k in out else term
        return self._new(out)

    def commutator(self, other):
        return self * other - other * self

    def adjoint(self):
        """Formal adjoint: ``(f P^k)^+ = P^k conj(f)`` re-normal-ordered."""
        out = QuantumElement.zero(self.domain, self.z)
        P = QuantumElement.momentum(self.domain, self.z)
        for k, f in self.terms.items():
            x = QuantumElement.function(f.conj(), self.z)
            for _ in range(k):
                x = P * x
            out = out + x
        return out

    def subs(self, name, value):
        return self._new({k: f.subs(name, value) for k, f in self.terms.items()})

    # -- identity --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, QuantumElement):
            return NotImplemented
        return self.domain == other.domain and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def serialize(self) -> str:
        from poissonlr.exact.piecewise import serialize_function

        if not self.terms:
            return "0"
        return "\n".join(f"P^{k}: {serialize_function(self.terms[k])}" for k in sorted(self.terms))

    __str__ = serialize


class WeylElement:
    """Normal-ordered polynomial in ``Q_1..Q_n, P_1..P_n``.

    ``terms`` maps ``(qexps, pexps)`` (tuples of length ``n``) to scalars.
    """

    __slots__ = ("n", "terms", "z")

    def __init__(self, n, terms: dict, z: Poly = ZVAR):
        self.n = n
        self.z = z
        self.terms = {k: c for k, c in terms.items() if c}

    @classmethod
    def scalar(cls, c, n, z=ZVAR):
        return cls(n, {((0,) * n, (0,) * n): Poly.coerce(c)}, z)

    @classmethod
    def symbol(cls, letter, index, n, z=ZVAR):
        e = tuple(1 if j == index - 1 else 0 for j in range(n))
        zero = (0,) * n
        key = (e, zero) if letter == "q" else (zero, e)
        return cls(n, {key: ONE}, z)

    def _new(self, terms):
        return WeylElement(self.n, terms, self.z)

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Poly()) + c
        return self._new(out)

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Poly.coerce(c)
        return self._new({k: v * c for k, v in self.terms.items()})

    def _reorder(self, b, c):
        """``P^b Q^c`` for one index: list of ``(j, coefficient)``, the
        result being ``sum_j coeff Q^(c-j) P^(b-j)``."""
        miz = -(I * self.z)
        return [
            (j, Poly.const(comb(b, j) * comb(c, j) * factorial(j)) * miz ** j)
            for j in range(min(b, c) + 1)
        ]

    def __mul__(self, other):
        out = {}
        for (qa, pa), ca in self.terms.items():
            for (qb, pb), cb in other.terms.items():
                partial = [((), (), ca * cb)]
                for i in range(self.n):
                    nxt = []
                    for q, p, c in partial:
                        for j, cj in self._reorder(pa[i], qb[i]):
                            nxt.append((q + (qa[i] + qb[i] - j,), p + (pa[i] + pb[i] - j,), c * cj))
                    partial = nxt
                for q, p, c in partial:
                    out[(q, p)] = out.get((q, p), Poly()) + c
        return self._new(out)

    def commutator(self, other):
        return self * other - other * self

    def adjoint(self):
        """``(c Q^a P^b)^+ = conj(c) P^b Q^a``, re-normal-ordered."""
        out = self._new({})
        zero = (0,) * self.n
        for (q, p), c in self.terms.items():
            left = self._new({(zero, p): c.conj()})
            right = self._new({(q, zero): ONE})
            out = out + left * right
        return out

    def subs(self, name, value):
        return self._new({k: c.subs(name, value) for k, c in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def serialize(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (q, p), c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]) + sum(kv[0][1]), kv[0])):
            mono = [f"Q{i + 1}^{e}" for i, e in enumerate(q) if e]
            mono += [f"P{i + 1}^{e}" for i, e in enumerate(p) if e]
            parts.append(f"({c})" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts)

    __str__ = serialize


class QuantumRealization:
    """``pi_z`` with symbolic (default) or numeric ``z`` and ``alpha``."""

    backend = "quantum"

    def __init__(self, pres, z=ZVAR, alpha=None):
        if not (pres.framed or pres.finite or pres.kind == "current"):
            raise ValueError("the quantum realization needs a framed or finite presentation")
        self.pres = pres
        self.z = Poly.coerce(z)
        if alpha is None:
            alpha = ALPHA if (pres.domain or CIRCLE) == CIRCLE and not pres.finite else 0
        self.alpha = Poly.coerce(alpha)
        self.iz = I * self.z

    # -- elements ----------------------------------------------------------
    def scalar(self, c):
        if self.pres.finite:
            return WeylElement.scalar(c, self.pres.n, self.z)
        return QuantumElement.scalar(c, self.pres.domain or CIRCLE, self.z)

    def zero(self):
        return self.scalar(0)

    def field_operator(self, h: PiecewiseFunction) -> QuantumElement:
        """``T_v = h P_alpha + (i z / 2) h'`` for ``v = h d/dx``."""
        za = self.z * self.alpha
        dh = h.derivative(strict=False)
        c0 = h * za + dh * (self.iz * Poly.const(mpq(1, 2)))
        return QuantumElement(h.domain, {0: c0, 1: h}, self.z)

    def generator(self, p):
        if p is None:
            return self.scalar(1)
        if isinstance(p, Sym):
            return WeylElement.symbol(p.letter, p.index, self.pres.n, self.z)
        if isinstance(p, (Fn, Rho)):
            return QuantumElement.function(p.f, self.z)
        if isinstance(p, (Vf, Frame, Cur)):
            return self.field_operator(self.pres.field_of(p).coefficient)
        raise TypeError(f"cannot realize {p!r}")

    def realize(self, t):
        from poissonlr.engine.normal import FREE, NormalForm, algebra_for, evaluate

        alg = algebra_for(self.pres, FREE, relations=False)
        nf = NormalForm.from_element(alg, evaluate(t, alg), FREE)
        out = self.zero()
        cache = {}
        for (word, m), c in nf.terms:
            x = self.scalar(Poly.coerce(c) * self.iz ** m)
            for p in word:
                if p not in cache:
                    cache[p] = self.generator(p)
                x = x * cache[p]
            out = out + x
        return out

    __call__ = realize

    # -- homomorphism checks ------------------------------------------------
    def bracket_image(self, a, b):
        """``[a, b]``; compared with ``i z pi({A, B})``."""
        return a.commutator(b)

    def lie_side(self, lie_image):
        return lie_image.scale(self.iz)

    def star(self, a):
        return a.adjoint()


def realize_quantum(t, pres, z=ZVAR, alpha=None):
    return QuantumRealization(pres, z, alpha).realize(t)


def normal_order(factors, pres, z=ZVAR, alpha=None):
    """Product of already realized elements, left to right."""
    r = QuantumRealization(pres, z, alpha)
    out = r.scalar(1)
    for f in factors:
        out = out * f
    return out
