"""Single-step rewrite rules and random-order rewriting.

Every rule is applied at the root of a subterm; ``arg`` picks the variant
when a rule has several shapes (for instance which side of a product is
distributed).  ``apply_rule`` performs one instance, ``redexes`` lists
the instances available to a normalization mode, and ``rewrite`` runs
them in a random order until none is left.  ``readback`` turns an
irreducible term into the dictionary layout used by ``NormalForm`` without
calling any algebra operation, so it is an independent route to the same
normal form.

Rules with no normalization role (``ANTISYM``, ``FARKAS``, ``GEN_LINEAR``)
exist for proof scripts.
"""

from __future__ import annotations

from gmpy2 import mpq

from poissonlr.engine.normal import CENTRAL, FREE, NormalForm
from poissonlr.engine.terms import (
    ONE_T, Z, Dot, Gen, Lie, One, Star, Sum, Term, ZGen, gen, linear, replace, subterm,
)
from poissonlr.exact.piecewise import PiecewiseFunction
from poissonlr.exact.presentation import Fn, Vf
from poissonlr.exact.scalar import ONE, Poly

HALF = Poly.const(mpq(1, 2))

RULES = (
    "LINEAR", "ASSOC", "ANTISYM", "LEIBNIZ", "LIE_HOM", "IDENT", "FUNC_MULT",
    "LR_JORDAN", "Z_LIE_CENTRAL", "Z_COMM_CENTRAL", "CENTRAL_COMM", "STAR_PUSH",
    "FARKAS", "GEN_LINEAR",
)
PROOF_ONLY = {"ANTISYM", "FARKAS", "GEN_LINEAR"}


class RuleError(ValueError):
    """Rule not applicable at the requested position."""


def term_key(t: Term):
    """Deterministic structural key (used to sort sums)."""
    if isinstance(t, Gen):
        return (0, t.payload.key())
    if isinstance(t, One):
        return (1,)
    if isinstance(t, ZGen):
        return (2,)
    if isinstance(t, Dot):
        return (3, term_key(t.left), term_key(t.right))
    if isinstance(t, Lie):
        return (4, term_key(t.left), term_key(t.right))
    if isinstance(t, Star):
        return (5, term_key(t.child))
    return (6, tuple((c.sort_key(), term_key(k)) for c, k in t.items))


def _leaf(t):
    return isinstance(t, (Gen, One))


def _is_fn(t):
    return isinstance(t, Gen) and t.payload.is_function


def _is_vec(t):
    return isinstance(t, Gen) and t.payload.is_field


def _lin_term(pres, pairs):
    """Linear combination of payloads (``None`` = identity) as a Sum."""
    return linear([(c, ONE_T if p is None else Gen(p, pres.tag)) for c, p in pairs])


def _pair(t):
    """``x.y`` or ``x.(y.r)``: returns ``(x, y, r)`` with ``r`` possibly None."""
    if not isinstance(t, Dot):
        return None
    if isinstance(t.right, Dot):
        return t.left, t.right.left, t.right.right
    return t.left, t.right, None


def _tail(t, r):
    return t if r is None else Dot(t, r)


def _dist_tail(s: Term, r):
    """``s . r`` distributed over the items of the Sum ``s``."""
    if r is None:
        return s
    return Sum(tuple((c, Dot(k, r)) for c, k in s.items))


def _is_comm(t):
    if isinstance(t, Sum) and len(t.items) == 2:
        (a1, d1), (a2, d2) = t.items
        if a1 == ONE and a2 == -ONE and isinstance(d1, Dot) and isinstance(d2, Dot):
            if d1.left == d2.right and d1.right == d2.left:
                return d1.left, d1.right
    return None


# ---------------------------------------------------------------------------
# rule variants: name -> {arg: (test, apply)}


def _linear_variants(t, pres):
    out = []
    if isinstance(t, Dot):
        if isinstance(t.left, Sum):
            out.append("dl")
        if isinstance(t.right, Sum):
            out.append("dr")
    elif isinstance(t, Lie):
        if isinstance(t.left, Sum):
            out.append("ll")
        if isinstance(t.right, Sum):
            out.append("lr")
    elif isinstance(t, Sum):
        if any(isinstance(k, Sum) for _, k in t.items):
            out.append("flat")
        seen = set()
        dup = False
        for c, k in t.items:
            if not c or k in seen:
                dup = True
                break
            seen.add(k)
        if dup:
            out.append("collect")
        if len(t.items) == 1 and t.items[0][0] == ONE:
            out.append("unwrap")
        if not dup and len(t.items) > 1:
            keys = [term_key(k) for _, k in t.items]
            if keys != sorted(keys):
                out.append("sort")
    return out


def _linear_apply(t, arg, pres):
    if arg == "dl":
        return Sum(tuple((c, Dot(k, t.right)) for c, k in t.left.items))
    if arg == "dr":
        return Sum(tuple((c, Dot(t.left, k)) for c, k in t.right.items))
    if arg == "ll":
        return Sum(tuple((c, Lie(k, t.right)) for c, k in t.left.items))
    if arg == "lr":
        return Sum(tuple((c, Lie(t.left, k)) for c, k in t.right.items))
    if arg == "flat":
        items = list(t.items)
        for i, (c, k) in enumerate(items):
            if isinstance(k, Sum):
                items[i:i + 1] = [(c * c2, k2) for c2, k2 in k.items]
                return Sum(tuple(items))
    if arg == "collect":
        acc, order = {}, []
        for c, k in t.items:
            if k not in acc:
                acc[k] = c
                order.append(k)
            else:
                acc[k] = acc[k] + c
        return Sum(tuple((acc[k], k) for k in order if acc[k]))
    if arg == "unwrap":
        return t.items[0][1]
    if arg == "sort":
        return Sum(tuple(sorted(t.items, key=lambda ck: term_key(ck[1]))))
    raise RuleError(f"LINEAR/{arg} not applicable")


def _assoc_variants(t, pres):
    return ["right"] if isinstance(t, Dot) and isinstance(t.left, Dot) else []


def _assoc_apply(t, arg, pres):
    return Dot(t.left.left, Dot(t.left.right, t.right))


def _antisym_variants(t, pres):
    return ["swap"] if isinstance(t, Lie) else []


def _antisym_apply(t, arg, pres):
    return Sum(((-ONE, Lie(t.right, t.left)),))


def _leibniz_variants(t, pres):
    out = []
    if isinstance(t, Lie):
        if isinstance(t.right, Dot):
            out.append("right")
        if isinstance(t.left, Dot):
            out.append("left")
    return out


def _leibniz_apply(t, arg, pres):
    a, b = t.left, t.right
    if arg == "right":  # {a, x.y} = {a,x}.y + x.{a,y}
        x, y = b.left, b.right
        return Sum(((ONE, Dot(Lie(a, x), y)), (ONE, Dot(x, Lie(a, y)))))
    x, y = a.left, a.right  # {x.y, b} = x.{y,b} + {x,b}.y
    return Sum(((ONE, Dot(x, Lie(y, b))), (ONE, Dot(Lie(x, b), y))))


def _lie_hom_variants(t, pres):
    if isinstance(t, Lie) and _leaf(t.left) and _leaf(t.right):
        return ["gen"]
    return []


def _lie_hom_apply(t, arg, pres):
    a = None if isinstance(t.left, One) else t.left.payload
    b = None if isinstance(t.right, One) else t.right.payload
    return _lin_term(pres, pres.bracket(a, b))


def _ident_variants(t, pres):
    out = []
    if isinstance(t, Dot):
        if isinstance(t.left, One):
            out.append("left")
        if isinstance(t.right, One):
            out.append("right")
    return out


def _ident_apply(t, arg, pres):
    return t.right if arg == "left" else t.left


def _func_mult_variants(t, pres):
    if not pres.lr_enabled:
        return []
    pr = _pair(t)
    if pr and _is_fn(pr[0]) and _is_fn(pr[1]):
        return ["chain" if pr[2] is not None else "pair"]
    return []


def _func_mult_apply(t, arg, pres):
    x, y, r = _pair(t)
    prod = gen(pres, Fn(x.payload.f * y.payload.f))
    if isinstance(prod, Sum):
        return _dist_tail(prod, r)
    return _tail(prod, r)


def _lr_jordan_variants(t, pres, mode=FREE):
    if not pres.lr_enabled:
        return []
    if mode == CENTRAL and pres.framed:
        # the pair form would undo the leaf expansion (D.f -> 2 f o D - f.D)
        return ["leaf"] if isinstance(t, Gen) and isinstance(t.payload, Vf) else []
    pr = _pair(t)
    if pr and _is_vec(pr[0]) and _is_fn(pr[1]):
        return ["chain" if pr[2] is not None else "pair"]
    return []


def _lr_jordan_apply(t, arg, pres):
    if arg == "leaf":
        # h o D = 1/2 (h.D + D.h)
        h = pres.frame_coefficient(t.payload)
        hg = gen(pres, Fn(h))
        D = Gen(pres.frame[0], pres.tag)
        return Sum(((HALF, Dot(hg, D)), (HALF, Dot(D, hg))))
    v, f, r = _pair(t)
    # v.f = 2 (f o v) - f.v
    fov = _lin_term(pres, pres.lr(f.payload, v.payload))
    items = [(c * 2, _tail(k, r)) for c, k in fov.items]
    items.append((-ONE, _tail(Dot(f, v), r) if r is None else Dot(f, Dot(v, r))))
    return Sum(tuple(items))


def _z_lie_variants(t, pres):
    out = []
    if isinstance(t, Lie):
        if isinstance(t.left, ZGen):
            out.append("left")
        if isinstance(t.right, ZGen):
            out.append("right")
    return out


def _z_lie_apply(t, arg, pres):
    return Sum(())


def _z_comm_variants(t, pres):
    pr = _pair(t)
    if pr and isinstance(pr[0], ZGen) and not isinstance(pr[1], (ZGen, Sum)):
        return ["chain" if pr[2] is not None else "pair"]
    return []


def _z_comm_apply(t, arg, pres):
    x, y, r = _pair(t)
    return Dot(y, _tail(x, r)) if r is not None else Dot(y, x)


def _central_comm_variants(t, pres, mode=FREE):
    if mode != CENTRAL:
        return []
    pr = _pair(t)
    if pr and isinstance(pr[0], Gen) and isinstance(pr[1], Gen):
        if pr[0].payload.key() > pr[1].payload.key():
            return ["chain" if pr[2] is not None else "pair"]
    return []


def _central_comm_apply(t, arg, pres):
    x, y, r = _pair(t)
    # x.y = y.x + Z.{x, y}
    return Sum(((ONE, Dot(y, _tail(x, r))), (ONE, Dot(Z, _tail(Lie(x, y), r)))))


def _star_variants(t, pres):
    return ["push"] if isinstance(t, Star) else []


def _star_apply(t, arg, pres):
    c = t.child
    if isinstance(c, Dot):
        return Dot(Star(c.right), Star(c.left))
    if isinstance(c, Lie):
        return Lie(Star(c.left), Star(c.right))
    if isinstance(c, Sum):
        return Sum(tuple((s.conj(), Star(k)) for s, k in c.items))
    if isinstance(c, Star):
        return c.child
    if isinstance(c, One):
        return ONE_T
    if isinstance(c, ZGen):
        return Sum(((-ONE, Z),))
    return gen(pres, c.payload.conj())


def _farkas_variants(t, pres):
    if isinstance(t, Dot) and _is_comm(t.left) and isinstance(t.right, Lie):
        return ["forward"]
    return []


def _farkas_apply(t, arg, pres):
    a, b = _is_comm(t.left)
    c, d = t.right.left, t.right.right
    comm = Sum(((ONE, Dot(c, d)), (-ONE, Dot(d, c))))
    return Dot(Lie(a, b), comm)


def _gen_linear_variants(t, pres):
    if isinstance(t, Sum) and t.items and all(isinstance(k, (Gen, One)) for _, k in t.items):
        kinds = {type(k.payload) for _, k in t.items if isinstance(k, Gen)}
        if len(kinds) == 1 and kinds <= {Fn}:
            return ["merge"]
    return []


def _gen_linear_apply(t, arg, pres):
    f = PiecewiseFunction.constant(0, pres.domain)
    for c, k in t.items:
        f = f + (PiecewiseFunction.constant(c, pres.domain) if isinstance(k, One) else k.payload.f * c)
    return gen(pres, Fn(f))


_TABLE = {
    "LINEAR": (_linear_variants, _linear_apply),
    "ASSOC": (_assoc_variants, _assoc_apply),
    "ANTISYM": (_antisym_variants, _antisym_apply),
    "LEIBNIZ": (_leibniz_variants, _leibniz_apply),
    "LIE_HOM": (_lie_hom_variants, _lie_hom_apply),
    "IDENT": (_ident_variants, _ident_apply),
    "FUNC_MULT": (_func_mult_variants, _func_mult_apply),
    "LR_JORDAN": (_lr_jordan_variants, _lr_jordan_apply),
    "Z_LIE_CENTRAL": (_z_lie_variants, _z_lie_apply),
    "Z_COMM_CENTRAL": (_z_comm_variants, _z_comm_apply),
    "CENTRAL_COMM": (_central_comm_variants, _central_comm_apply),
    "STAR_PUSH": (_star_variants, _star_apply),
    "FARKAS": (_farkas_variants, _farkas_apply),
    "GEN_LINEAR": (_gen_linear_variants, _gen_linear_apply),
}
_MODE_AWARE = {"LR_JORDAN", "CENTRAL_COMM"}


def variants(rule: str, t: Term, pres, mode: str = CENTRAL) -> list:
    if rule not in _TABLE:
        raise RuleError(f"unknown rule {rule!r}")
    test = _TABLE[rule][0]
    if rule in _MODE_AWARE:
        return test(t, pres, mode)
    return test(t, pres)


def apply_at_root(t: Term, rule: str, arg, pres, mode: str = CENTRAL) -> Term:
    vs = variants(rule, t, pres, mode)
    if arg is None and vs:
        arg = vs[0]
    if arg not in vs:
        raise RuleError(f"{rule} ({arg}) is not applicable here")
    return _TABLE[rule][1](t, arg, pres)


def apply_rule(t: Term, rule: str, position=(), pres=None, arg=None, mode: str = CENTRAL) -> Term:
    """Apply one instance of ``rule`` at ``position``."""
    try:
        sub = subterm(t, tuple(position))
    except IndexError as exc:
        raise RuleError(f"bad position {position}: {exc}") from None
    return replace(t, tuple(position), apply_at_root(sub, rule, arg, pres, mode))


# ---------------------------------------------------------------------------
# normalization by random-order rewriting


def rule_set(pres, mode: str) -> list:
    rules = ["LINEAR", "ASSOC", "LEIBNIZ", "LIE_HOM", "IDENT", "Z_LIE_CENTRAL",
             "Z_COMM_CENTRAL", "STAR_PUSH"]
    if pres.lr_enabled:
        rules += ["FUNC_MULT", "LR_JORDAN"]
    if mode == CENTRAL:
        rules.append("CENTRAL_COMM")
    return rules


def _walk(t, pos=()):
    yield pos, t
    for i, k in enumerate(t.children()):
        yield from _walk(k, pos + (i,))


def redexes(t: Term, pres, mode: str) -> list:
    out = []
    rules = rule_set(pres, mode)
    for pos, sub in _walk(t):
        for r in rules:
            for a in variants(r, sub, pres, mode):
                if r == "LINEAR" and a == "sort":
                    continue
                out.append((r, pos, a))
    return out


def _first_redex(t, pres, mode, rng):
    """Randomized depth-first scan: at every node the node itself and its
    children are visited in a shuffled order; the first hit wins."""
    rules = rule_set(pres, mode)

    def at(sub):
        order = rules[:]
        rng.shuffle(order)
        for r in order:
            vs = [a for a in variants(r, sub, pres, mode) if not (r == "LINEAR" and a == "sort")]
            if vs:
                return r, rng.choice(vs)
        return None

    def scan(sub, pos):
        kids = sub.children()
        order = list(range(-1, len(kids)))
        rng.shuffle(order)
        for i in order:
            if i < 0:
                hit = at(sub)
                if hit:
                    return hit[0], pos, hit[1]
            else:
                hit = scan(kids[i], pos + (i,))
                if hit:
                    return hit
        return None

    return scan(t, ())


class NonTermination(RuntimeError):
    pass


def rewrite(t: Term, pres, mode: str, rng, max_steps: int = 20000):
    """Rewrite in a random order until irreducible; returns ``(term, steps)``."""
    steps = 0
    while True:
        red = _first_redex(t, pres, mode, rng)
        if red is None:
            return t, steps
        r, pos, a = red
        t = replace(t, pos, apply_at_root(subterm(t, pos), r, a, pres, mode))
        steps += 1
        if steps > max_steps:
            raise NonTermination(f"no normal form after {max_steps} steps")


class NotNormal(ValueError):
    pass


def _chain(t):
    out = []
    while isinstance(t, Dot):
        if isinstance(t.left, Dot):
            raise NotNormal("left-nested product")
        out.append(t.left)
        t = t.right
    out.append(t)
    return out


def readback(t: Term, pres, mode: str) -> NormalForm:
    """Collect an irreducible term into a NormalForm (purely syntactic)."""
    from poissonlr.engine.normal import algebra_for

    alg = algebra_for(pres, mode)
    items = t.items if isinstance(t, Sum) else ((ONE, t),)
    fun = pres.lr_enabled and pres.function_backed
    acc = {}
    for c, mono in items:
        leaves = _chain(mono)
        m = sum(1 for x in leaves if isinstance(x, ZGen))
        rest = [x for x in leaves if not isinstance(x, ZGen)]
        if leaves[len(rest):] and any(not isinstance(x, ZGen) for x in leaves[len(rest):]):
            raise NotNormal("Z is not rightmost")
        if any(isinstance(x, ZGen) for x in leaves[:len(rest)]):
            raise NotNormal("Z is not rightmost")
        if len(rest) == 1 and isinstance(rest[0], One):
            rest = []
        for x in rest:
            if not isinstance(x, Gen):
                raise NotNormal(f"unexpected leaf {x!r}")
        word = [x.payload for x in rest]
        if fun:
            coeff = PiecewiseFunction.constant(c, pres.domain)
            if word and word[0].is_function:
                coeff = word[0].f * c
                word = word[1:]
            if any(p.is_function for p in word):
                raise NotNormal("function to the right of a field")
        else:
            coeff = c
        if mode == CENTRAL and alg.canonical:
            keys = [p.key() for p in word]
            if keys != sorted(keys):
                raise NotNormal("word not sorted")
        key = (tuple(word), m)
        alg.add_into(acc, key, coeff)
    if mode == CENTRAL and pres.framed:
        if any(p != pres.frame[0] for (w, _) in acc for p in w):
            raise NotNormal("non-frame field left in a central form")
        elem = {(len(w), m): c for (w, m), c in acc.items()}
        return NormalForm.from_element(alg, elem, mode)
    if mode == CENTRAL and pres.finite:
        elem = {}
        for (w, m), c in acc.items():
            qs = [0] * pres.n
            ps = [0] * pres.n
            for p in w:
                (qs if p.letter == "q" else ps)[p.index - 1] += 1
            elem[(tuple(qs), tuple(ps), m)] = c
        return NormalForm.from_element(alg, elem, mode)
    return NormalForm.from_element(alg, acc, mode)
