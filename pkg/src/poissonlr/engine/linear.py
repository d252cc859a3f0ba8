"""Exact equality of non-canonical normal forms up to generator linearity.

FREE-mode (and order-only) normal forms keep every generator as a letter,
so ``v(h1) + v(h2)`` and ``v(h1 + h2)`` are different monomials although
the generator map is linear.  A monomial ``c * a_1 ... a_k * Z^m`` is
multilinear in its letters, so a normal form is a sum of rank-one tensors.
Two forms agree modulo linearity iff their difference tensor vanishes:

1. split symbolic scalars (``i``, ``z``, ...) out of every function so
   that all slots carry rational piecewise polynomials;
2. group by shape (letter kinds, ``Z`` power, scalar monomial);
3. per group, eliminate slot by slot: write the slot vectors (coordinates
   on the common refinement, one per interval and degree) in a basis
   chosen among them, and recurse on the remaining slots.
"""

from __future__ import annotations

from gmpy2 import mpq

from poissonlr.exact.piecewise import LINE, PiecewiseFunction
from poissonlr.exact.presentation import Cur, Fn, Frame, Rho, Sym, Vf
from poissonlr.exact.scalar import ONE, Poly, slot
from poissonlr.kernels import FIELD, MASK

_XSHIFT = FIELD * slot("x")


def _slots(coeff, word):
    """``(scalar, kinds, functions)`` for one monomial."""
    kinds, funcs = [], []
    if isinstance(coeff, PiecewiseFunction):
        scalar = ONE
        kinds.append("fn")
        funcs.append(coeff)
    else:
        scalar = Poly.coerce(coeff)
    for p in word:
        if isinstance(p, Sym):
            kinds.append(("sym", p.letter, p.index))
            continue
        if isinstance(p, Fn):
            kinds.append("fn")
            funcs.append(p.f)
        elif isinstance(p, (Vf, Frame)):
            kinds.append("vf")
            funcs.append(p.field.coefficient)
        elif isinstance(p, Rho):
            kinds.append("rho")
            funcs.append(p.f)
        elif isinstance(p, Cur):
            kinds.append("cur")
            funcs.append(p.v.coefficient)
        else:
            raise TypeError(f"no linear structure for {p!r}")
    return scalar, tuple(kinds), funcs


def _split(f: PiecewiseFunction) -> dict:
    """``{scalar monomial key: rational function}`` with ``f = sum mu * f_mu``."""
    parts: dict = {}
    for j, p in enumerate(f.pieces):
        for key, c in p.terms.items():
            xk = (key >> _XSHIFT) & MASK
            mu = key - (xk << _XSHIFT)
            parts.setdefault(mu, {}).setdefault(j, {})[xk << _XSHIFT] = c
    out = {}
    for mu, by_piece in parts.items():
        pieces = [Poly(dict(by_piece.get(j, {}))) for j in range(len(f.pieces))]
        out[mu] = PiecewiseFunction._raw(f.domain, f.breaks, pieces, f.smoothness)
    return out


def _expand(sign, nf_terms, groups):
    for (word, m), coeff in nf_terms:
        scalar, kinds, funcs = _slots(coeff, word)
        combos = [(scalar * sign, [])]
        for f in funcs:
            nxt = []
            for s, fs in combos:
                for mu, part in _split(f).items():
                    nxt.append((s * Poly({mu: mpq(1)}), fs + [part]))
            combos = nxt
        for s, fs in combos:
            for mu, q in s.terms.items():
                groups.setdefault((kinds, m, mu), []).append((q, fs))


def _cuts(funcs):
    pts = set()
    for f in funcs:
        pts.update(f.breaks)
    return sorted(pts)


def _coords(f: PiecewiseFunction, cuts) -> dict:
    out = {}
    if f.domain == LINE:
        samples = [cuts[0] - 1] if cuts else [mpq(0)]
        samples += [(a + b) / 2 for a, b in zip(cuts, cuts[1:])]
        samples += [cuts[-1] + 1] if cuts else []
    else:
        ends = cuts[1:] + [mpq(1)]
        samples = [(a + b) / 2 for a, b in zip(cuts, ends)]
    for idx, t in enumerate(samples):
        p = f.piece_at(t)
        for key, c in p.terms.items():
            out[(idx, key)] = c
    return out


def _basis(vectors):
    """Write every vector as a combination of independent ones among them.

    Returns one ``{basis index: coefficient}`` dict per input vector.
    """
    rows = []  # (pivot, reduced vector, {basis index: coefficient})
    out = []
    for i, v in enumerate(vectors):
        w = dict(v)
        expr: dict = {}
        for pivot, r, rexpr in rows:
            c = w.get(pivot)
            if not c:
                continue
            for k, x in r.items():
                y = w.get(k, 0) - c * x
                if y:
                    w[k] = y
                else:
                    w.pop(k, None)
            for b, x in rexpr.items():
                y = expr.get(b, 0) + c * x
                if y:
                    expr[b] = y
                else:
                    expr.pop(b, None)
        if w:
            pivot = min(w)
            scale = 1 / w[pivot]
            r = {k: x * scale for k, x in w.items()}
            rexpr = {b: -x * scale for b, x in expr.items()}
            rexpr[i] = scale
            rows.append((pivot, r, rexpr))
            out.append({i: mpq(1)})
        else:
            out.append(expr)
    return out


def _vanishes(items, j=0) -> bool:
    """Is ``sum q * f_j (x) f_j+1 (x) ...`` the zero tensor?"""
    if not items:
        return True
    if j == len(items[0][1]):
        return sum(q for q, _ in items) == 0
    cuts = _cuts(fs[j] for _, fs in items)
    lam = _basis([_coords(fs[j], cuts) for _, fs in items])
    sub: dict = {}
    for (q, fs), expr in zip(items, lam):
        for b, c in expr.items():
            sub.setdefault(b, []).append((q * c, fs))
    return all(_vanishes(group, j + 1) for group in sub.values())


def same_modulo_linearity(a_terms, b_terms) -> bool:
    """Do two normal-form term tuples agree once generators are read linearly?"""
    groups: dict = {}
    _expand(ONE, a_terms, groups)
    _expand(-ONE, b_terms, groups)
    return all(_vanishes(items) for items in groups.values())
