"""Classical realization: commutative polynomials in the momenta.

On the circle and the line an element is ``sum_k f_k(x) p^k`` and the
bracket is

    {a, b} = d_p a d_x b - d_x a d_p b,

which reproduces ``{h p, f} = h f'`` (the action of ``v = h d/dx``) and
``{h p, k p} = (h k' - k h') p``.  For the canonical algebra the bracket
is ``sum_i d_q a d_p b - d_p a d_q b`` so that ``{q_i, p_j} = delta_ij``.
``Z`` goes to 0.
"""

from __future__ import annotations

from poissonlr.exact.piecewise import PiecewiseFunction
from poissonlr.exact.presentation import Fn, Frame, Sym, Vf
from poissonlr.exact.scalar import ONE, Poly


class ClassicalElement:
    """``terms`` maps the momentum power ``k`` to a piecewise function."""

    __slots__ = ("domain", "terms")

    def __init__(self, domain, terms: dict):
        self.domain = domain
        self.terms = {k: f for k, f in terms.items() if not f.is_zero()}

    @classmethod
    def scalar(cls, c, domain):
        return cls(domain, {0: PiecewiseFunction.constant(c, domain)})

    def _new(self, terms):
        return ClassicalElement(self.domain, terms)

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
        return self._new({k: f * Poly.coerce(c) for k, f in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for a, f in self.terms.items():
            for b, g in other.terms.items():
                out[a + b] = out[a + b] + f * g if a + b in out else f * g
        return self._new(out)

    def d_p(self):
        return self._new({k - 1: f * k for k, f in self.terms.items() if k})

    def d_x(self):
        return self._new({k: f.derivative(strict=False) for k, f in self.terms.items()})

    def bracket(self, other):
        return self.d_p() * other.d_x() - self.d_x() * other.d_p()

    def conj(self):
        return self._new({k: f.conj() for k, f in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, ClassicalElement):
            return NotImplemented
        return self.domain == other.domain and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def serialize(self) -> str:
        from poissonlr.exact.piecewise import serialize_function

        if not self.terms:
            return "0"
        return "\n".join(f"p^{k}: {serialize_function(self.terms[k])}" for k in sorted(self.terms))

    __str__ = serialize


class PhaseSpacePoly:
    """Commutative polynomial in ``q_1..q_n, p_1..p_n``: ``(qexps, pexps) -> scalar``."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms: dict):
        self.n = n
        self.terms = {k: c for k, c in terms.items() if c}

    @classmethod
    def scalar(cls, c, n):
        return cls(n, {((0,) * n, (0,) * n): Poly.coerce(c)})

    @classmethod
    def symbol(cls, letter, index, n):
        e = tuple(1 if j == index - 1 else 0 for j in range(n))
        zero = (0,) * n
        return cls(n, {((e, zero) if letter == "q" else (zero, e)): ONE})

    def _new(self, terms):
        return PhaseSpacePoly(self.n, terms)

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
        return self._new({k: v * Poly.coerce(c) for k, v in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for (qa, pa), ca in self.terms.items():
            for (qb, pb), cb in other.terms.items():
                key = (tuple(x + y for x, y in zip(qa, qb)), tuple(x + y for x, y in zip(pa, pb)))
                out[key] = out.get(key, Poly()) + ca * cb
        return self._new(out)

    def _d(self, which, i):
        out = {}
        for (q, p), c in self.terms.items():
            e = (q if which == "q" else p)[i]
            if not e:
                continue
            lowered = tuple(x - (j == i) for j, x in enumerate(q if which == "q" else p))
            key = (lowered, p) if which == "q" else (q, lowered)
            out[key] = out.get(key, Poly()) + c * e
        return self._new(out)

    def bracket(self, other):
        out = self._new({})
        for i in range(self.n):
            out = out + self._d("q", i) * other._d("p", i) - self._d("p", i) * other._d("q", i)
        return out

    def conj(self):
        return self._new({k: c.conj() for k, c in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, PhaseSpacePoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def serialize(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (q, p), c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            mono = [f"q{i + 1}^{e}" for i, e in enumerate(q) if e]
            mono += [f"p{i + 1}^{e}" for i, e in enumerate(p) if e]
            parts.append(f"({c})" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts)

    __str__ = serialize


class ClassicalRealization:
    backend = "classical"

    def __init__(self, pres):
        if pres.kind == "current":
            raise ValueError("current presentations have no classical phase-space image")
        self.pres = pres

    def scalar(self, c):
        if self.pres.finite:
            return PhaseSpacePoly.scalar(c, self.pres.n)
        return ClassicalElement.scalar(c, self.pres.domain)

    def generator(self, p):
        if isinstance(p, Sym):
            return PhaseSpacePoly.symbol(p.letter, p.index, self.pres.n)
        if isinstance(p, Fn):
            return ClassicalElement(p.f.domain, {0: p.f})
        if isinstance(p, (Vf, Frame)):
            h = self.pres.field_of(p).coefficient
            return ClassicalElement(h.domain, {1: h})
        raise TypeError(f"cannot realize {p!r}")

    def realize(self, t):
        from poissonlr.engine.normal import FREE, NormalForm, algebra_for, evaluate

        alg = algebra_for(self.pres, FREE, relations=False)
        nf = NormalForm.from_element(alg, evaluate(t, alg), FREE)
        out = self.scalar(0)
        for (word, m), c in nf.terms:
            if m:
                continue  # Z -> 0
            x = self.scalar(c)
            for p in word:
                x = x * self.generator(p)
            out = out + x
        return out

    __call__ = realize


def realize_classical(t, pres):
    return ClassicalRealization(pres).realize(t)


def poisson_bracket_classical(a, b):
    return a.bracket(b)
