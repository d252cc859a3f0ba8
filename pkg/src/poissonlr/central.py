"""The central element relating commutators and Lie products.

For a function ``g`` split by a partition of unity into pieces ``g_i``
supported in arcs ``O_i``, and local pairs ``(q_i, w_i)`` with
``{q_i, w_i} = 1`` on ``O_i``, one has ``g_i = {q_i, g_i o w_i}`` and

    Z_g = sum_i [q_i, g_i o w_i].

On a compact base ``g = 1`` gives ``Z_1``, which coincides with the
adjoined generator ``Z`` in CENTRAL mode.  On the line the cutoffs ``g_n``
(equal to 1 on ``K_n = [-n, n]``) give a sequence ``Z_n`` whose products
with a localized element stabilize.

Besides direct checks in CENTRAL normal form or in a realization, the
chain of identities behind these facts is available as replayable proof
scripts (``decomposition_script``, ``weighted_script``,
``weighted_left_script``, ``uniqueness_script``, ``lie_centrality_script``,
``comm_centrality_script``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpq

from poissonlr.cli.syntax import generator_names, print_normal_form, print_term
from poissonlr.engine.normal import CENTRAL, FREE, Verdict, equal, normalize
from poissonlr.engine.rules import apply_at_root
from poissonlr.engine.proofs import EXPAND, STRUCTURAL, ProofError, ProofScript, Scripter
from poissonlr.engine.terms import (
    ONE_T, ZERO_T, Dot, Gen, Lie, One, Sum, Term, Z, commutator, gen,
)
from poissonlr.exact.piecewise import (
    CIRCLE, LINE, CoverError, PiecewiseFunction, VectorField, bump, build_partition, local_pair,
    pairing,
)
from poissonlr.exact.presentation import DEFAULT_COVER, Cur, Fn, Rho, Vf
from poissonlr.exact.scalar import ONE, as_q
from poissonlr.report import Check, check, flagged


class NonCompactError(ValueError):
    """A global Z needs a compact base."""


LEIBNIZ_STRUCT = STRUCTURAL + (("LEIBNIZ", "right"), ("LEIBNIZ", "left"))


# ---------------------------------------------------------------------------
# constructions


@dataclass
class ZConstruction:
    pres: object
    g: PiecewiseFunction
    cover: list
    partition: object
    pieces: list  # g_i
    pairs: list  # (q_i, w_i)
    q_terms: list
    p_terms: list
    z_term: Term

    @property
    def g_term(self) -> Term:
        return function_term(self.pres, self.g)

    def __len__(self):
        return len(self.pieces)

    def validate(self) -> list:
        """Exact checks of the construction invariants."""
        out = []
        total = PiecewiseFunction.constant(0, self.g.domain)
        for gi in self.pieces:
            total = total + gi
        out.append(check("sum of the pieces equals g", "exact", total == self.g))
        for i, (gi, (q, w)) in enumerate(zip(self.pieces, self.pairs)):
            inner = self.partition.inner[i]
            out.append(check(f"supp g_{i} inside O_{i}", "exact", _inside(gi, inner)))
            pr = pairing(q, w)
            out.append(check(f"pairing of (q_{i}, w_{i}) is 1 on O_{i}", "exact", _one_on(pr, inner)))
            out.append(check(f"g_{i} = {{q_{i}, g_{i} o w_{i}}}", "exact", pr * gi == gi))
        return out

    def summary(self) -> dict:
        return {
            "summands": len(self.pieces),
            "cover": [[str(a), str(b)] for a, b in self.cover],
            "inner": [[str(a), str(b)] for a, b in self.partition.inner],
            "z_term": _label(self.pres, self.z_term),
        }


def _label(pres, t: Term) -> str:
    return print_term(t, generator_names(pres))


def function_term(pres, f: PiecewiseFunction) -> Term:
    """The generator for ``f``; the constant 1 is the identity itself."""
    if f.is_constant() and f.constant_value() == ONE:
        return ONE_T
    payload = Rho(f) if pres.kind == "current" else Fn(f)
    return gen(pres, payload)


def _field_term(pres, h: PiecewiseFunction) -> Term:
    v = VectorField(h, check=False)
    return gen(pres, Cur(v) if pres.kind == "current" else Vf(v))


def _inside(f: PiecewiseFunction, arc) -> bool:
    a, b = arc
    for lo, hi in f.support():
        if f.domain == CIRCLE:
            if not any(a <= lo + n and hi + n <= b for n in (-1, 0, 1)):
                return False
        elif not (a <= lo and hi <= b):
            return False
    return True


def _one_on(f: PiecewiseFunction, arc) -> bool:
    a, b = arc
    for lo, hi, p in f.intervals():
        lo = -math.inf if lo is None else lo
        hi = math.inf if hi is None else hi
        for n in ((-1, 0, 1) if f.domain == CIRCLE else (0,)):
            if lo + n < b and a < hi + n and p != ONE:
                return False
    return True


def _base_domain(pres):
    if pres.kind not in ("circle", "line", "current"):
        raise ValueError(f"{pres.tag} has no function generators to build Z_g from")
    return pres.domain or CIRCLE


def default_line_cover(lo, hi):
    """Overlapping intervals of length 2, step 1, covering ``[lo, hi]``."""
    arcs = []
    a = as_q(lo) - mpq(1, 2)
    while True:
        arcs.append((a, a + 2))
        if a + 2 > hi:
            return arcs
        a += 1


def build_Zg(pres, g, cover=None) -> ZConstruction:
    """``Z_g = sum_i [q_i, g_i o w_i]`` for ``g`` (a function or a constant)."""
    domain = _base_domain(pres)
    if not isinstance(g, PiecewiseFunction):
        g = PiecewiseFunction.constant(g, domain)
    if g.domain != domain:
        raise ValueError("g lives on the wrong domain")
    k = pres.smoothness
    if domain == CIRCLE:
        cover = [tuple(map(as_q, a)) for a in (cover or pres.cover or DEFAULT_COVER)]
        part = build_partition(CIRCLE, cover, k)
    else:
        sup = g.support()
        if not sup:
            raise CoverError("g is zero")
        if sup[0][0] == -math.inf or sup[-1][1] == math.inf:
            raise CoverError("g must have compact support on the line")
        lo, hi = sup[0][0], sup[-1][1]
        cover = [tuple(map(as_q, a)) for a in (cover or default_line_cover(lo, hi))]
        part = build_partition(LINE, cover, k, region=(lo, hi))
    pieces, pairs, qs, ps, comms = [], [], [], [], []
    for i, phi in enumerate(part.functions):
        gi = g * phi
        if gi.is_zero():
            continue
        q, w = local_pair(part.inner[i], part.arcs[i], k, domain)
        qt = function_term(pres, q)
        pt = _field_term(pres, gi * w.coefficient)
        pieces.append(gi)
        pairs.append((q, w))
        qs.append(qt)
        ps.append(pt)
        comms.append((ONE, commutator(qt, pt)))
    kept = [i for i, phi in enumerate(part.functions) if not (g * phi).is_zero()]
    part.functions = [part.functions[i] for i in kept]
    part.inner = [part.inner[i] for i in kept]
    part.arcs = [part.arcs[i] for i in kept]
    cover = [cover[i] for i in kept]
    return ZConstruction(pres, g, cover, part, pieces, pairs, qs, ps, Sum(tuple(comms)))


def canonical_Z(pres) -> Term:
    """``[q_1, p_1]`` for the canonical algebra."""
    if pres.kind != "canonical":
        raise ValueError("canonical_Z needs a canonical presentation")
    return commutator(Gen(pres.named["q1"], pres.tag), Gen(pres.named["p1"], pres.tag))


def build_Z_compact(pres, cover=None) -> Term:
    if pres.kind == "canonical":
        return canonical_Z(pres)
    if not pres.compact:
        raise NonCompactError("a single central Z exists only on a compact base; use build_Z_sequence")
    return build_Zg(pres, 1, cover).z_term


# ---------------------------------------------------------------------------
# supports and the line sequence


def term_support(pres, A: Term):
    """Closed intervals outside which every CENTRAL coefficient of ``A``
    vanishes, or None when some coefficient is not compactly supported."""
    nf = normalize(A, CENTRAL, pres)
    runs = []
    for _, c in nf.terms:
        if not isinstance(c, PiecewiseFunction):
            return None
        for lo, hi in c.support():
            if lo == -math.inf or hi == math.inf:
                return None
            runs.append((lo, hi))
    return sorted(runs)


def _coefficients(pres, A):
    return [c for _, c in normalize(A, CENTRAL, pres).terms]


def vanishes_against(pres, g: PiecewiseFunction, A: Term) -> bool:
    """``g . c = 0`` for every CENTRAL coefficient ``c`` of ``A``."""
    return all((g * c).is_zero() for c in _coefficients(pres, A))


def one_on_support(pres, g: PiecewiseFunction, A: Term) -> bool:
    """``g = 1`` wherever a CENTRAL coefficient of ``A`` is non-zero."""
    return all(((g - 1) * c).is_zero() for c in _coefficients(pres, A))


@dataclass
class CentralSequence:
    pres: object
    exhaustion: list  # K_n = (lo, hi), n = 1..N
    cutoffs: list
    constructions: list

    def z(self, n: int) -> Term:
        return self.constructions[n - 1].z_term

    def g(self, n: int) -> PiecewiseFunction:
        return self.cutoffs[n - 1]

    def __len__(self):
        return len(self.exhaustion)

    def nbar(self, *terms):
        """Largest ``n`` with some ``A`` not inside ``K_n`` (0 when all sit
        in ``K_1``), so the statements hold for ``n > nbar``; None when a
        term is not localized or leaves the last ``K_n``."""
        worst = 0
        for A in terms:
            sup = term_support(self.pres, A)
            if sup is None:
                return None
            first = None
            for n, (lo, hi) in enumerate(self.exhaustion, start=1):
                if all(lo <= a and b <= hi for a, b in sup):
                    first = n
                    break
            if first is None:
                return None
            worst = max(worst, first - 1)
        return worst


def build_Z_sequence(pres, exhaustion=None, nmax: int = 4) -> CentralSequence:
    if pres.kind != "line":
        raise ValueError("central sequences are built on the line")
    if exhaustion is None:
        exhaustion = [(-n, n) for n in range(1, nmax + 1)]
    ex = [(as_q(a), as_q(b)) for a, b in exhaustion]
    for (a1, b1), (a2, b2) in zip(ex, ex[1:]):
        if not (a2 < a1 and b1 < b2):
            raise ValueError("exhaustion must be strictly increasing")
    cutoffs = [bump(LINE, a - 1, a, b, b + 1, pres.smoothness) for a, b in ex]
    cons = [build_Zg(pres, g) for g in cutoffs]
    return CentralSequence(pres, ex, cutoffs, cons)


# ---------------------------------------------------------------------------
# proof scripts (FREE mode)


def _require_scriptable(zc):
    if zc.pres.kind not in ("circle", "line"):
        raise ProofError("proof scripts need function generators of an LR presentation")


def decomposition_script(zc: ZConstruction) -> ProofScript:
    """``g = sum_i {q_i, g_i o w_i}``."""
    _require_scriptable(zc)
    pres = zc.pres
    sc = Scripter(pres, zc.g_term, FREE, "decomposition")
    if isinstance(sc.t, One):
        sc.back("LINEAR", Sum(((ONE, ONE_T),)), (), "unwrap")
    pieces = tuple((ONE, Gen(Fn(gi), pres.tag)) for gi in zc.pieces)
    sc.back("GEN_LINEAR", Sum(pieces))
    for i, (q, p) in enumerate(zip(zc.q_terms, zc.p_terms)):
        lie = Lie(q, p)
        lin = apply_at_root(lie, "LIE_HOM", "gen", pres, FREE)
        if lin != Sum(((ONE, sc.at((i,))),)):
            sc.back("GEN_LINEAR", lin, (i,))
        else:
            sc.back("LINEAR", lin, (i,), "unwrap")
        sc.back("LIE_HOM", lie, (i,))
    return sc.script()


def weighted_script(zc: ZConstruction, A: Term, B: Term) -> ProofScript:
    """``[A, B] . g = {A, B} . Z_g``."""
    sc = Scripter(zc.pres, Dot(commutator(A, B), zc.g_term), FREE, "weighted-right")
    sc.embed(decomposition_script(zc), (1,))
    sc.fwd("LINEAR", (), "dr")
    for i in range(len(zc)):
        sc.fwd("FARKAS", (i,))
    sc.back("LINEAR", Dot(Lie(A, B), zc.z_term), (), "dr")
    return sc.script()


def weighted_left_script(zc: ZConstruction, A: Term, B: Term) -> ProofScript:
    """``g . [A, B] = Z_g . {A, B}``."""
    sc = Scripter(zc.pres, Dot(zc.g_term, commutator(A, B)), FREE, "weighted-left")
    sc.embed(decomposition_script(zc), (0,))
    sc.fwd("LINEAR", (), "dl")
    for i, (q, p) in enumerate(zip(zc.q_terms, zc.p_terms)):
        sc.back("FARKAS", Dot(commutator(q, p), Lie(A, B)), (i,))
    sc.back("LINEAR", Dot(zc.z_term, Lie(A, B)), (), "dl")
    return sc.script()


def _to_product_grid(sc: Scripter, zc_left_n: int, pos_dl=True):
    sc.fwd("LINEAR", (), "dl" if pos_dl else "dr")
    for i in range(zc_left_n):
        sc.fwd("LINEAR", (i,), "dr" if pos_dl else "dl")


def uniqueness_half(zc: ZConstruction, hc: ZConstruction) -> ProofScript:
    """``Z_g . h = g . Z_h``."""
    pres = zc.pres
    sc = Scripter(pres, Dot(zc.z_term, hc.g_term), FREE, "uniqueness")
    sc.embed(decomposition_script(hc), (1,))
    _to_product_grid(sc, len(zc))
    for i in range(len(zc)):
        for j in range(len(hc)):
            sc.fwd("FARKAS", (i, j))
    other = Scripter(pres, Dot(zc.g_term, hc.z_term), FREE)
    other.embed(decomposition_script(zc), (0,))
    _to_product_grid(other, len(zc))
    if other.t != sc.t:
        raise ProofError("the two expansions of the uniqueness identity do not meet")
    sc.embed(other.script().reversed(), ())
    return sc.script()


def uniqueness_script(zc: ZConstruction, zc2: ZConstruction, hc: ZConstruction) -> ProofScript:
    """``Z_g . h = g . Z_h = Z'_g . h`` for two constructions of one ``g``."""
    if zc.g != zc2.g:
        raise ProofError("both constructions must target the same g")
    s = uniqueness_half(zc, hc).then(uniqueness_half(zc2, hc).reversed())
    return ProofScript(s.start, s.end, s.steps, FREE, "uniqueness")


def lie_centrality_script(zc: ZConstruction, A: Term) -> ProofScript:
    """``{Z_g . g, A} = 0`` for a generator ``A`` with ``{g, A} = 0``."""
    _require_scriptable(zc)
    pres = zc.pres
    g = zc.g_term
    sc = Scripter(pres, Lie(Dot(zc.z_term, g), A), FREE, "lie-centrality")
    sc.fwd("LEIBNIZ", (), "left")
    sc.fwd("LIE_HOM", (0, 1))
    if sc.at((0, 1)) != ZERO_T:
        raise ProofError("side condition {g, A} = 0 fails")
    sc.fwd("LINEAR", (0,), "dr")
    sc.fwd("LINEAR", (), "flat")
    sc.fwd("LINEAR", (), "unwrap")
    items = []
    for q, p in zip(zc.q_terms, zc.p_terms):
        items.append((ONE, Dot(commutator(Lie(q, A), p), g)))
        items.append((ONE, Dot(commutator(q, Lie(p, A)), g)))
    sc.connect(Sum(tuple(items)), LEIBNIZ_STRUCT)
    k = 0
    for q, p in zip(zc.q_terms, zc.p_terms):
        sc.embed(weighted_script(zc, Lie(q, A), p), (k,))
        sc.embed(weighted_script(zc, q, Lie(p, A)), (k + 1,))
        k += 2
    lies = Sum(tuple((ONE, sc.at((j, 0))) for j in range(k)))
    sc.back("LINEAR", Dot(lies, zc.z_term), (), "dl")
    sc.drive((0,), EXPAND)
    if sc.at((0,)) != ZERO_T:
        sc.fwd("GEN_LINEAR", (0,))
    sc.fwd("LINEAR", (), "dl")
    if sc.t != ZERO_T:
        raise ProofError("the weighted Jacobi sum does not vanish")
    return sc.script()


def comm_centrality_script(zc: ZConstruction, A: Term) -> ProofScript:
    """``[Z_1, A] = 0`` (``g = 1`` only)."""
    if zc.g_term != ONE_T:
        raise ProofError("the commutator script is written for g = 1")
    z = zc.z_term
    sc = Scripter(zc.pres, commutator(z, A), FREE, "comm-centrality")
    sc.back("IDENT", Dot(commutator(z, A), ONE_T), (), "right")
    sc.embed(weighted_script(zc, z, A), ())
    sc.back("IDENT", Dot(z, ONE_T), (0, 0), "right")
    sc.embed(lie_centrality_script(zc, A), (0,))
    sc.fwd("LINEAR", (), "dl")
    return sc.script()


# ---------------------------------------------------------------------------
# verification


def _realization(pres, backend, z=None, alpha=None):
    from poissonlr.realize.checks import make_realization

    if backend == "classical":
        return make_realization(pres, "classical")
    return make_realization(pres, "quantum", z, alpha)


def _same(pres, backend, a: Term, b: Term, z=None, alpha=None):
    """``(verdict, witness)`` for ``a = b`` under ``backend``."""
    if backend == "central":
        v = equal(a, b, CENTRAL, pres)
        return v == Verdict.EQUAL, {
            "lhs": print_normal_form(normalize(a, CENTRAL, pres), generator_names(pres)),
            "rhs": print_normal_form(normalize(b, CENTRAL, pres), generator_names(pres)),
            "verdict": v.value,
        }
    r = _realization(pres, backend, z, alpha)
    ra, rb = r(a), r(b)
    return ra == rb, {"lhs": ra.serialize(), "rhs": rb.serialize()}


def _zero(pres, backend, a: Term, **kw):
    return _same(pres, backend, a, ZERO_T, **kw)


def _is_leaf(t):
    return isinstance(t, (Gen, One))


def verify_centrality(zc: ZConstruction, probes, backend="central", z=None, alpha=None) -> list:
    """``{Z_g . g, A} = 0 = [Z_g . g, A]`` for probes with ``{A, g} = 0``."""
    pres = zc.pres
    elem = Dot(zc.z_term, zc.g_term)
    out = []
    for A in probes:
        label = _label(pres, A)
        side = normalize(Lie(A, zc.g_term), CENTRAL, pres).is_zero()
        if not side:
            out.append(flagged(f"centrality against {label}", backend, "side condition {A, g} = 0 fails"))
            continue
        if backend == "proof":
            if not _is_leaf(A):
                out.append(flagged(f"centrality against {label}", backend, "scripts take generator probes"))
                continue
            s = lie_centrality_script(zc, A)
            out.append(check(f"{{Z_g.g, A}} = 0 by replay for {label}", backend,
                             s.valid(pres) and s.end == ZERO_T, steps=str(len(s))))
            if zc.g_term == ONE_T:
                s = comm_centrality_script(zc, A)
                out.append(check(f"[Z_1, A] = 0 by replay for {label}", backend,
                                 s.valid(pres) and s.end == ZERO_T, steps=str(len(s))))
            continue
        ok, w = _zero(pres, backend, Lie(elem, A), z=z, alpha=alpha)
        out.append(check(f"{{Z_g.g, A}} = 0 for {label}", backend, ok, **w))
        ok, w = _zero(pres, backend, commutator(elem, A), z=z, alpha=alpha)
        out.append(check(f"[Z_g.g, A] = 0 for {label}", backend, ok, **w))
    return out


def verify_relation_31(pres, A: Term, B: Term, backend="central", zc=None, z=None, alpha=None) -> Check:
    """``[A, B] = Z . {A, B}`` with the constructed ``Z`` on a compact base,
    or the weighted form ``[A, B] . g = {A, B} . Z_g`` otherwise."""
    label = f"{_label(pres, A)} ; {_label(pres, B)}"
    if pres.kind == "canonical":
        lhs, rhs = commutator(A, B), Dot(canonical_Z(pres), Lie(A, B))
        stmt = f"[A, B] = [q1, p1].{{A, B}} for {label}"
    elif zc is None and pres.compact and pres.kind != "current":
        lhs, rhs = commutator(A, B), Dot(build_Z_compact(pres), Lie(A, B))
        stmt = f"[A, B] = Z_1.{{A, B}} for {label}"
    else:
        if zc is None:
            if not pres.compact:
                raise ValueError("the weighted form on the line needs a construction Z_g")
            zc = build_Zg(pres, 1)
        lhs = Dot(commutator(A, B), zc.g_term)
        rhs = Dot(Lie(A, B), zc.z_term)
        stmt = f"[A, B].g = {{A, B}}.Z_g for {label}"
    ok, w = _same(pres, backend, lhs, rhs, z=z, alpha=alpha)
    return check(stmt, backend, ok, **w)


def verify_localization(pres, g: PiecewiseFunction, A: Term, backends=("central", "classical", "quantum")) -> list:
    """Disjoint supports kill products; ``g = 1`` on the support fixes ``A``."""
    gt = function_term(pres, g)
    label = _label(pres, A)
    out = []
    if vanishes_against(pres, g, A):
        for b in backends:
            ok, w = _zero(pres, b, Dot(gt, A))
            ok2, _ = _zero(pres, b, Dot(A, gt))
            out.append(check(f"g.A = 0 = A.g (disjoint supports) for {label}", b, ok and ok2, **w))
    if one_on_support(pres, g, A):
        ok, w = _same(pres, "central", Dot(gt, A), A)
        ok2, _ = _same(pres, "central", Dot(A, gt), A)
        out.append(check(f"g.A = A = A.g (g = 1 on the support) for {label}", "central", ok and ok2, **w))
    if not out:
        out.append(flagged(f"localization for {label}", "central", "g neither vanishes nor equals 1 on supp A"))
    return out


def verify_stabilization(seq: CentralSequence, A: Term) -> Check:
    """``Z_n . A`` is constant exactly from ``n = nbar(A) + 1`` on and equals ``Z . A``."""
    pres = seq.pres
    label = _label(pres, A)
    nb = seq.nbar(A)
    if nb is None:
        return flagged(f"stabilization for {label}", "central", "A is not localized in the exhaustion")
    forms = [normalize(Dot(seq.z(n), A), CENTRAL, pres) for n in range(1, len(seq) + 1)]
    target = normalize(Dot(Z, A), CENTRAL, pres)
    first = len(forms) + 1
    for n in range(len(forms), 0, -1):
        if forms[n - 1] != target:
            break
        first = n
    ok = first == nb + 1
    return check(f"Z_n.A stabilizes at n = nbar + 1 = {nb + 1} for {label}", "central", ok,
                 nbar=str(nb), first_stable=str(first), value=print_normal_form(target, generator_names(pres)))


def verify_sequence_relation(seq: CentralSequence, A: Term, B: Term) -> list:
    """``[A, B] = Z_n.{A, B}`` and ``{Z_n, A} = 0 = [Z_n, A]`` for ``n > nbar(A, B)``."""
    pres = seq.pres
    label = f"{_label(pres, A)} ; {_label(pres, B)}"
    nb = seq.nbar(A, B)
    if nb is None:
        return [flagged(f"sequence relation for {label}", "central", "pair is not localized in the exhaustion")]
    out = []
    for n in range(nb + 1, len(seq) + 1):
        zn = seq.z(n)
        ok, w = _same(pres, "central", commutator(A, B), Dot(zn, Lie(A, B)))
        out.append(check(f"[A, B] = Z_{n}.{{A, B}} for {label}", "central", ok, **w))
        ok1, _ = _zero(pres, "central", Lie(zn, A))
        ok2, _ = _zero(pres, "central", commutator(zn, A))
        out.append(check(f"{{Z_{n}, A}} = 0 = [Z_{n}, A] for {label}", "central", ok1 and ok2))
    return out
