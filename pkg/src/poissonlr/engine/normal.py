"""Normal forms: the fast path of the rewrite system.

A term is interpreted in one of three algebras, each of which implements
exactly the relations of the requested mode:

``FramedCentral``
    CENTRAL mode on the circle and the line.  Every element is uniquely
    ``sum f_a,m * D^a * Z^m`` with ``D`` the frame field, because
    ``D.g = g.D + Z g'`` and ``h o D = 1/2 (h.D + D.h) = h.D + 1/2 Z h'``.
``WeylCentral``
    CENTRAL mode on the canonical algebra: ``q^a p^b Z^m`` with
    ``p_i q_i = q_i p_i - Z``.
``WordAlgebra``
    FREE mode everywhere (functions moved left by the Jordan relation,
    products of functions merged, the identity absorbed) and the
    order-only CENTRAL mode of current algebras.

The Lie product is always computed structurally: both arguments are
split into generator factors and expanded by the Leibniz rule, with the
presentation's bracket oracle on generator pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb

from gmpy2 import mpq

from poissonlr import kernels as K
from poissonlr.engine.terms import (
    ONE_T, Z, Dot, Gen, Lie, One, Star, Sum, Term, ZGen, linear,
)
from poissonlr.exact.piecewise import PiecewiseFunction
from poissonlr.exact.presentation import Fn, Sym
from poissonlr.exact.scalar import ONE, Poly

FREE = "free"
CENTRAL = "central"
HALF = mpq(1, 2)


class Verdict(str, Enum):
    EQUAL = "Equal"
    NOT_EQUAL = "NotEqual"
    UNKNOWN = "Unknown"


class ModeError(ValueError):
    pass


def _is_zero(c) -> bool:
    if isinstance(c, PiecewiseFunction):
        return c.is_zero()
    return not c


class Algebra:
    """Elements are dicts ``key -> coefficient`` with no zero entries."""

    canonical = True

    def __init__(self, pres):
        self.pres = pres
        self._gen_cache = {}
        self._word_cache = {}

    # -- coefficient ring -----------------------------------------------------
    def unit(self):
        return ONE

    # -- linear structure ---------------------------------------------------------
    def add_into(self, out: dict, key, c):
        s = out.get(key)
        s = c if s is None else s + c
        if _is_zero(s):
            out.pop(key, None)
        else:
            out[key] = s

    def add(self, a: dict, b: dict) -> dict:
        out = dict(a)
        for k, c in b.items():
            self.add_into(out, k, c)
        return out

    def scale(self, c, a: dict) -> dict:
        c = Poly.coerce(c)
        if not c:
            return {}
        if c == ONE:
            return a
        out = {}
        for k, v in a.items():
            self.add_into(out, k, v * c)
        return out

    def lin(self, pairs) -> dict:
        out = {}
        for c, p in pairs:
            e = self.one() if p is None else self.gen(p)
            for k, v in e.items():
                self.add_into(out, k, v * c)
        return out

    def word(self, payloads) -> dict:
        payloads = tuple(payloads)
        hit = self._word_cache.get(payloads)
        if hit is None:
            hit = self.one()
            for p in payloads:
                hit = self.mul(hit, self.gen(p))
            self._word_cache[payloads] = hit
        return hit

    def gen(self, p) -> dict:
        hit = self._gen_cache.get(p)
        if hit is None:
            hit = self._gen(p)
            self._gen_cache[p] = hit
        return hit

    # -- structure shared by all backends ---------------------------------------
    def zpow(self, a: dict, m: int) -> dict:
        if not m:
            return a
        return self.mul(a, self.word_z(m))

    def lie(self, a: dict, b: dict) -> dict:
        """Leibniz expansion over generator factors."""
        out = {}
        for ka, ca in a.items():
            sa, fa, ma = self.factors(ka, ca)
            for kb, cb in b.items():
                sb, fb, mb = self.factors(kb, cb)
                acc = {}
                for i, x in enumerate(fa):
                    for j, y in enumerate(fb):
                        br = self.pres.bracket(x, y)
                        if not br:
                            continue
                        t = self.mul(self.word(fa[:i]), self.word(fb[:j]))
                        t = self.mul(t, self.lin(br))
                        t = self.mul(t, self.word(fb[j + 1:]))
                        t = self.mul(t, self.word(fa[i + 1:]))
                        acc = self.add(acc, t)
                if acc:
                    acc = self.zpow(self.scale(sa * sb, acc), ma + mb)
                    out = self.add(out, acc)
        return out

    def star(self, a: dict) -> dict:
        out = {}
        for k, c in a.items():
            s, fs, m = self.factors(k, c)
            e = self.word(tuple(p.conj() for p in reversed(fs)))
            sign = -1 if m % 2 else 1
            e = self.zpow(self.scale(s.conj() * sign, e), m)
            out = self.add(out, e)
        return out

    # -- to be supplied ---------------------------------------------------------------
    def one(self) -> dict:
        raise NotImplementedError

    def word_z(self, m) -> dict:
        raise NotImplementedError

    def _gen(self, p) -> dict:
        raise NotImplementedError

    def mul(self, a, b) -> dict:
        raise NotImplementedError

    def factors(self, key, coeff):
        """``(scalar, generator payloads, Z power)`` of one monomial."""
        raise NotImplementedError

    def nf_items(self, a: dict):
        """Yield ``((word, m), coefficient)`` in the shared NormalForm layout."""
        raise NotImplementedError


class _FunctionCoefficients(Algebra):
    """Coefficients are piecewise functions (the leftmost function factor)."""

    def unit(self):
        return PiecewiseFunction.constant(1, self.pres.domain)

    def scale(self, c, a):
        c = Poly.coerce(c)
        if not c:
            return {}
        out = {}
        for k, v in a.items():
            self.add_into(out, k, v * c)
        return out

    def lin(self, pairs):
        out = {}
        for c, p in pairs:
            e = self.one() if p is None else self.gen(p)
            for k, v in e.items():
                self.add_into(out, k, v * c)
        return out

    def coeff_factors(self, f):
        if f.is_constant():
            return f.constant_value(), []
        return ONE, [Fn(f)]


class FramedCentral(_FunctionCoefficients):
    """CENTRAL quotient of a framed LR presentation; keys are ``(a, m)``."""

    def __init__(self, pres):
        super().__init__(pres)
        self.D = pres.frame[0]
        self._dcache = {}

    def one(self):
        return {(0, 0): self.unit()}

    def word_z(self, m):
        return {(0, m): self.unit()}

    def _gen(self, p):
        if p.is_function:
            return {(0, 0): p.f}
        if p == self.D:
            return {(1, 0): self.unit()}
        h = self.pres.frame_coefficient(p)
        out = {}
        self.add_into(out, (1, 0), h)
        self.add_into(out, (0, 1), h.derivative(strict=False) * HALF)
        return out

    def _derivs(self, g, upto):
        ds = self._dcache.get(g)
        if ds is None:
            ds = [g]
            self._dcache[g] = ds
        while len(ds) <= upto and not ds[-1].is_zero():
            ds.append(ds[-1].derivative(strict=False))
        return ds

    def mul(self, a, b):
        out = {}
        for (ka, ma), f in a.items():
            for (kb, mb), g in b.items():
                ds = self._derivs(g, ka)
                for j in range(min(ka, len(ds) - 1) + 1):
                    gj = ds[j]
                    if gj.is_zero():
                        break
                    c = f * gj
                    if j:
                        c = c * comb(ka, j)
                    self.add_into(out, (ka + kb - j, ma + mb + j), c)
        return out

    def factors(self, key, coeff):
        a, m = key
        s, fs = self.coeff_factors(coeff)
        return s, fs + [self.D] * a, m

    def nf_items(self, a):
        for (k, m), c in a.items():
            yield ((self.D,) * k, m), c


class WeylCentral(Algebra):
    """CENTRAL quotient of the canonical algebra; keys ``(qexp, pexp, m)``."""

    def __init__(self, pres):
        super().__init__(pres)
        self.n = pres.n

    def one(self):
        z = (0,) * self.n
        return {(z, z, 0): ONE}

    def word_z(self, m):
        z = (0,) * self.n
        return {(z, z, m): ONE}

    def _gen(self, p):
        e = [0] * self.n
        e[p.index - 1] = 1
        z = (0,) * self.n
        if p.letter == "q":
            return {(tuple(e), z, 0): ONE}
        return {(z, tuple(e), 0): ONE}

    def mul(self, a, b):
        out = {}
        n = self.n
        for (qa, pa, ma), ca in a.items():
            for (qb, pb, mb), cb in b.items():
                # p^pa q^qb = prod_i sum_j C(pa_i, j) qb_i!/(qb_i-j)! (-Z)^j q^(qb_i-j) p^(pa_i-j)
                partial = [((), (), 0, ca * cb)]
                for i in range(n):
                    nxt = []
                    for qs, ps, zs, c in partial:
                        for j, w in K.weyl_pairs(pa[i], qb[i]):
                            sign = -1 if j % 2 else 1
                            nxt.append((qs + (qb[i] - j,), ps + (pa[i] - j,), zs + j, c * (w * sign)))
                    partial = nxt
                for qs, ps, zs, c in partial:
                    key = (
                        tuple(x + y for x, y in zip(qa, qs)),
                        tuple(x + y for x, y in zip(ps, pb)),
                        ma + mb + zs,
                    )
                    self.add_into(out, key, c)
        return out

    def factors(self, key, coeff):
        qs, ps, m = key
        fs = []
        for i, e in enumerate(qs):
            fs += [Sym("q", i + 1)] * e
        for i, e in enumerate(ps):
            fs += [Sym("p", i + 1)] * e
        return coeff, fs, m

    def nf_items(self, a):
        for k, c in a.items():
            _, fs, m = self.factors(k, c)
            yield (tuple(fs), m), c


class WordAlgebra(Algebra):
    """Words of generators with ``Z`` collected; keys ``(word, m)``.

    ``lr``: apply the Jordan relation and merge function products (FREE
    mode of an LR presentation); coefficients are then functions.
    ``order``: sort words with ``x.y -> y.x + Z {x, y}`` (order-only
    CENTRAL mode, not canonical).
    """

    def __init__(self, pres, lr: bool, order: bool = False):
        super().__init__(pres)
        self.lr = lr
        self.order = order
        self.canonical = False
        self._push = {}
        self._sorted = {}
        if lr:
            self.unit = lambda: PiecewiseFunction.constant(1, pres.domain)

    def one(self):
        return {((), 0): self.unit()}

    def word_z(self, m):
        return {((), m): self.unit()}

    def scale(self, c, a):
        c = Poly.coerce(c)
        if not c:
            return {}
        out = {}
        for k, v in a.items():
            self.add_into(out, k, v * c)
        return out

    def _gen(self, p):
        if self.lr and p.is_function:
            return {((), 0): p.f}
        return {((p,), 0): self.unit()}

    def _push_left(self, word, f):
        """``word . f`` as ``[(g, word')]`` with the function moved left."""
        if f.is_constant():
            return [(f, word)]
        key = (word, f)
        hit = self._push.get(key)
        if hit is not None:
            return hit
        if not word:
            out = [(f, ())]
        else:
            w0, w = word[:-1], word[-1]
            acc = {}
            # w . f = 2 (f o w) - f . w
            for c, u in self.pres.lr(Fn(f), w):
                self.add_into(acc, w0 + (u,), self.unit() * (c * 2))
            for g, w1 in self._push_left(w0, f):
                self.add_into(acc, w1 + (w,), -g)
            out = [(g, k) for k, g in acc.items()]
        self._push[key] = out
        return out

    def _sort(self, word):
        hit = self._sorted.get(word)
        if hit is not None:
            return hit
        for i in range(len(word) - 1):
            x, y = word[i], word[i + 1]
            if x.key() > y.key():
                pre, post = word[:i], word[i + 2:]
                out = dict(self._sort(pre + (y, x) + post))
                br = self.pres.bracket(x, y)
                for c, p in br:
                    mid = pre + ((p,) if p is not None else ()) + post
                    for (w, m), v in self._sort(mid).items():
                        self.add_into(out, (w, m + 1), v * c)
                break
        else:
            out = {(word, 0): self.unit()}
        self._sorted[word] = out
        return out

    def mul(self, a, b):
        out = {}
        for (wa, ma), fa in a.items():
            for (wb, mb), fb in b.items():
                m = ma + mb
                if self.lr:
                    for g, w in self._push_left(wa, fb):
                        self.add_into(out, (w + wb, m), fa * g)
                elif self.order:
                    for (w, dz), c in self._sort(wa + wb).items():
                        self.add_into(out, (w, m + dz), fa * fb * c)
                else:
                    self.add_into(out, (wa + wb, m), fa * fb)
        return out

    def factors(self, key, coeff):
        w, m = key
        if self.lr:
            if coeff.is_constant():
                return coeff.constant_value(), list(w), m
            return ONE, [Fn(coeff)] + list(w), m
        return coeff, list(w), m

    def nf_items(self, a):
        return iter(a.items())


# ---------------------------------------------------------------------------
# evaluation


def algebra_for(pres, mode: str, relations: bool = True) -> Algebra:
    """Backend for ``mode``; ``relations=False`` keeps only IDENT (pure
    structural expansion of Lie and star)."""
    cache = pres.__dict__.setdefault("_algebras", {})
    key = (mode, relations)
    if key in cache:
        return cache[key]
    if not relations:
        alg = WordAlgebra(pres, lr=False)
    elif mode == CENTRAL:
        if pres.framed:
            alg = FramedCentral(pres)
        elif pres.finite:
            alg = WeylCentral(pres)
        else:
            alg = WordAlgebra(pres, lr=False, order=True)
    elif mode == FREE:
        alg = WordAlgebra(pres, lr=pres.lr_enabled)
    else:
        raise ModeError(f"unknown mode {mode!r}")
    cache[key] = alg
    return alg


def evaluate(t: Term, alg: Algebra) -> dict:
    memo = {}

    def go(x):
        hit = memo.get(id(x))
        if hit is not None:
            return hit[1]
        if isinstance(x, Gen):
            out = alg.lin(alg.pres.canon(x.payload))
        elif isinstance(x, One):
            out = alg.one()
        elif isinstance(x, ZGen):
            out = alg.word_z(1)
        elif isinstance(x, Dot):
            out = alg.mul(go(x.left), go(x.right))
        elif isinstance(x, Lie):
            out = alg.lie(go(x.left), go(x.right))
        elif isinstance(x, Star):
            out = alg.star(go(x.child))
        elif isinstance(x, Sum):
            out = {}
            for c, k in x.items:
                out = alg.add(out, alg.scale(c, go(k)))
        else:
            raise TypeError(f"not a term: {x!r}")
        memo[id(x)] = (x, out)
        return out

    return go(t)


@dataclass(frozen=True)
class NormalForm:
    """Sum of monomials ``coefficient * word * Z^m``.

    ``terms`` maps ``(word, m)`` to the coefficient: a piecewise function
    (the optional leading function generator) for function-backed
    presentations, a scalar otherwise.
    """

    terms: tuple  # sorted ((word, m), coefficient) pairs
    mode: str
    canonical: bool
    pres_tag: str
    note: str = ""

    @classmethod
    def from_element(cls, alg: Algebra, elem: dict, mode: str, note=""):
        items = list(alg.nf_items(elem))
        items.sort(key=lambda kv: (len(kv[0][0]), kv[0][1], tuple(p.key() for p in kv[0][0])))
        return cls(tuple(items), mode, alg.canonical, alg.pres.tag, note)

    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __eq__(self, other):
        """Canonical forms compare entrywise; other forms compare as tensors,
        i.e. modulo linearity of the generator letters."""
        if not isinstance(other, NormalForm):
            return NotImplemented
        if self.pres_tag != other.pres_tag:
            return False
        if self.as_dict() == other.as_dict():
            return True
        if self.canonical and other.canonical:
            return False
        from poissonlr.engine.linear import same_modulo_linearity

        return same_modulo_linearity(self.terms, other.terms)

    def __hash__(self):
        if not self.canonical:
            return hash((self.pres_tag, self.mode))
        return hash(frozenset(self.as_dict()))

    def to_term(self) -> Term:
        """Left-nested products; a lone unit-coefficient monomial is bare."""
        pairs = []
        for (word, m), c in self.terms:
            factors = []
            if isinstance(c, PiecewiseFunction):
                if c.is_constant():
                    s = c.constant_value()
                else:
                    s = ONE
                    factors.append(Gen(Fn(c), self.pres_tag))
            else:
                s = c
            factors += [Gen(p, self.pres_tag) for p in word]
            factors += [Z] * m
            if not factors:
                body = ONE_T
            else:
                body = factors[0]
                for f in factors[1:]:
                    body = Dot(body, f)
            pairs.append((s, body))
        if len(pairs) == 1 and pairs[0][0] == ONE:
            return pairs[0][1]
        return linear(pairs)

    def __str__(self):
        from poissonlr.cli.syntax import print_normal_form

        return print_normal_form(self)


def normalize(t: Term, mode: str, pres) -> NormalForm:
    """Normal form of ``t``.  CENTRAL on an unframed infinite presentation
    falls back to order-only reordering and is flagged non-canonical."""
    if mode not in (FREE, CENTRAL):
        raise ModeError(f"unknown mode {mode!r}")
    alg = algebra_for(pres, mode)
    note = ""
    if mode == CENTRAL and not alg.canonical:
        note = "order-only reordering: presentation has no frame, form is not canonical"
    return NormalForm.from_element(alg, evaluate(t, alg), mode, note)


def equal(a: Term, b: Term, mode: str, pres) -> Verdict:
    na = normalize(a, mode, pres)
    nb = normalize(b, mode, pres)
    if na == nb:
        return Verdict.EQUAL
    if mode == CENTRAL and na.canonical:
        return Verdict.NOT_EQUAL
    return Verdict.UNKNOWN


def lie_free(t: Term, pres) -> Term:
    """Expand every Lie node and star by Leibniz/antisymmetry/star rules
    only; the result is a sum of products of generators."""
    alg = algebra_for(pres, FREE, relations=False)
    return NormalForm.from_element(alg, evaluate(t, alg), FREE).to_term()


def quotient_z(t: Term, z) -> Term:
    """Replace every ``Z`` leaf by ``i z * 1``."""
    iz = Poly.var("i") * Poly.coerce(z)

    def go(x):
        if isinstance(x, ZGen):
            return Sum(((iz, ONE_T),))
        kids = x.children()
        if not kids:
            return x
        return x.with_children([go(k) for k in kids])

    return go(t)
