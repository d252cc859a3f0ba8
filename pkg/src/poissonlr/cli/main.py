"""``poissonlr`` command line.

Every command builds a :class:`~poissonlr.report.Report`; ``emit_report``
renders it as text or as JSON (sorted keys, no timings, so equal inputs
give byte-identical output).  Exit codes: 0 all checks pass, 1 some check
fails, 2 usage, parse or precondition error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time

from gmpy2 import mpq

from poissonlr import sampling as S
from poissonlr.cli.syntax import ParseError, generator_names, parse_expression, print_normal_form, print_term
from poissonlr.engine.normal import CENTRAL, FREE, Verdict, equal, normalize
from poissonlr.engine.proofs import ProofError, derive_farkas
from poissonlr.engine.terms import ONE_T, ZERO_T, Z, named
from poissonlr.exact.piecewise import LINE, CoverError, bump
from poissonlr.exact.presentation import DEFAULT_COVER, Fn, builtin, load_presentation
from poissonlr.exact.scalar import Poly, as_q
from poissonlr.report import Report, check, flagged

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

VERIFY_TARGETS = ("thm31", "centrality", "localization", "stabilization", "homomorphism", "weyl", "flow")

COVERS = {
    "two-arcs": DEFAULT_COVER,
    "three-arcs": [(mpq(-1, 8), mpq(3, 8)), (mpq(1, 4), mpq(3, 4)), (mpq(5, 8), mpq(9, 8))],
}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--presentation", default="circle",
                        help="circle, line, canonical<n>, current-circle or a YAML file")
    common.add_argument("--mode", choices=(FREE, CENTRAL), default=CENTRAL)
    common.add_argument("--backend", choices=("central", "classical", "quantum", "proof"), default=None)
    common.add_argument("--z", default=None, help="realization parameter (rational or symbol)")
    common.add_argument("--alpha", default=None, help="theta-angle (rational or symbol)")
    common.add_argument("--samples", type=int, default=10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = _Parser(prog="poissonlr", description="Exact Poisson enveloping algebras of Lie-Rinehart algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("normalize", parents=[common], help="normal form of expressions")
    s.add_argument("exprs", nargs="*")
    s.add_argument("--file", help="expression file, one expression per line")

    s = sub.add_parser("equal", parents=[common], help="decide A = B")
    s.add_argument("a")
    s.add_argument("b")

    s = sub.add_parser("derive-farkas", parents=[common], help="proof script for [A,B].{C,D} = {A,B}.[C,D]")
    for name in "abcd":
        s.add_argument(name)

    s = sub.add_parser("build-z", parents=[common], help="construct Z_g and check it")
    s.add_argument("--g", default="one", help="'one', a function generator name or a literal")
    s.add_argument("--cover", default=None, help="two-arcs, three-arcs or 'a:b,c:d,...'")
    s.add_argument("--n", type=int, default=None, help="on the line: use the cutoff g_n")

    s = sub.add_parser("verify", parents=[common], help="randomized verification")
    s.add_argument("target", choices=VERIFY_TARGETS)
    s.add_argument("--n", type=int, default=2, help="cutoff index on the line")

    s = sub.add_parser("realize", parents=[common], help="image in a realization")
    s.add_argument("exprs", nargs="*")
    s.add_argument("--file")

    s = sub.add_parser("selftest", parents=[common], help="acceptance criteria 1-9")
    s.add_argument("--only", default=None, help="comma-separated criterion numbers or names")
    return p


# ---------------------------------------------------------------------------
# argument helpers


def load_pres(value: str):
    if os.path.exists(value):
        with open(value, encoding="utf-8") as fh:
            return load_presentation(fh.read())
    return builtin(value)


def parse_scalar(text):
    if text is None:
        return None
    try:
        return as_q(text)
    except (ValueError, TypeError, ZeroDivisionError):
        pass
    try:
        return Poly.parse(text)
    except Exception as exc:  # noqa: BLE001 - reported as usage error
        raise UsageError(f"cannot read scalar {text!r}: {exc}") from None


def parse_cover(text):
    if text is None:
        return None
    if text in COVERS:
        return COVERS[text]
    arcs = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        arcs.append((as_q(a.strip()), as_q(b.strip())))
    return arcs


def _exprs(args, pres):
    texts = list(args.exprs)
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            texts += [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not texts:
        raise UsageError("no expressions given")
    return texts, [parse_expression(t, pres) for t in texts]


def _names(pres):
    return generator_names(pres)


# ---------------------------------------------------------------------------
# commands


def cmd_normalize(args, pres, rep):
    texts, terms = _exprs(args, pres)
    forms = []
    for t in terms:
        nf = normalize(t, args.mode, pres)
        forms.append({"normal_form": print_normal_form(nf, _names(pres)), "canonical": nf.canonical,
                      "note": nf.note})
    rep.data = {"mode": args.mode, "inputs": texts, "results": forms}


def cmd_equal(args, pres, rep):
    a, b = parse_expression(args.a, pres), parse_expression(args.b, pres)
    v = equal(a, b, args.mode, pres)
    names = _names(pres)
    rep.checks.append(check(
        f"{args.a} = {args.b}", args.mode, v == Verdict.EQUAL, verdict=v.value,
        lhs=print_normal_form(normalize(a, args.mode, pres), names),
        rhs=print_normal_form(normalize(b, args.mode, pres), names),
    ))


def cmd_derive_farkas(args, pres, rep):
    A, B, C, D = (parse_expression(x, pres) for x in (args.a, args.b, args.c, args.d))
    s = derive_farkas(A, B, C, D, pres)
    rep.checks.append(check("every step is a single legal rule application", "proof", s.valid(pres),
                            steps=str(len(s))))
    rep.checks.append(check("start and end agree in CENTRAL mode", "central", s.check_ends(pres, CENTRAL)))
    rep.checks.append(check("the identity itself is not used", "proof", "FARKAS" not in s.rules_used()))
    rep.data = {"script": s.record(_names(pres))}


def _g_function(args, pres):
    from poissonlr.exact.piecewise import PiecewiseFunction

    if getattr(args, "n", None) and pres.kind == "line":
        n = args.n
        return bump(LINE, -n - 1, -n, n, n + 1, pres.smoothness)
    if args.g in (None, "one", "1"):
        if pres.kind == "line":
            raise UsageError("on the line g must have compact support: pass --n or a function")
        return PiecewiseFunction.constant(1, pres.domain)
    t = parse_expression(args.g, pres)
    p = getattr(t, "payload", None)
    if not isinstance(p, Fn):
        raise UsageError("--g must name a function generator")
    return p.f


def cmd_build_z(args, pres):
    from poissonlr.central import build_Zg, canonical_Z, verify_centrality

    rep = Report("build-z", pres.tag)
    if pres.kind == "canonical":
        zt = canonical_Z(pres)
        rep.data = {"z_term": print_term(zt, _names(pres))}
        rep.checks.append(check("[q1, p1] = Z", "central", equal(zt, Z, CENTRAL, pres) == Verdict.EQUAL))
        return rep
    zc = build_Zg(pres, _g_function(args, pres), parse_cover(args.cover))
    rep.data = zc.summary()
    rep.checks.extend(zc.validate())
    if zc.g_term == ONE_T and pres.kind != "current":
        rep.checks.append(check("Z_1 = Z", "central", equal(zc.z_term, Z, CENTRAL, pres) == Verdict.EQUAL))
    backend = args.backend or ("quantum" if pres.kind == "current" else "central")
    probes = [named(pres, k) for k in sorted(pres.named)]
    rep.checks.extend(verify_centrality(zc, probes, backend, parse_scalar(args.z), parse_scalar(args.alpha)))
    return rep


def _sequence_cutoff(pres, n):
    return bump(LINE, -n - 1, -n, n, n + 1, pres.smoothness)


def verify_thm31(args, pres, rng, rep):
    from poissonlr.central import build_Z_sequence, build_Zg, verify_relation_31, verify_sequence_relation

    z, alpha = parse_scalar(args.z), parse_scalar(args.alpha)
    backend = args.backend or ("quantum" if pres.kind == "current" else "central")
    if backend == "proof":
        raise UsageError("thm31 is checked in the central, quantum or classical backend")
    if pres.kind == "line":
        seq = build_Z_sequence(pres, nmax=4)
        zc = seq.constructions[-1]
        for _ in range(args.samples):
            A, B = S.localized_pair(pres, rng, reach=3)
            if backend == "central":
                rep.checks.extend(verify_sequence_relation(seq, A, B))
            rep.checks.append(verify_relation_31(pres, A, B, backend, zc=zc, z=z, alpha=alpha))
        return
    zc = build_Zg(pres, 1) if pres.kind == "current" else None
    for A, B in S.generator_pairs(pres, rng, args.samples):
        rep.checks.append(verify_relation_31(pres, A, B, backend, zc=zc, z=z, alpha=alpha))


def verify_centrality_cmd(args, pres, rng, rep):
    from poissonlr.central import build_Zg, verify_centrality

    backend = args.backend or ("quantum" if pres.kind == "current" else "central")
    if pres.kind == "canonical":
        verify_canonical_centrality(args, pres, rng, rep, backend)
        return
    if pres.kind == "line":
        zc = build_Zg(pres, _sequence_cutoff(pres, args.n))
        probes = [S.localized_probe(pres, rng, reach=args.n) if k % 3 else S.generator(pres, rng)
                  for k in range(args.samples)]
        if backend == "proof":
            probes = [S.window_generator(pres, rng, -args.n, args.n) for _ in range(args.samples)]
    else:
        zc = build_Zg(pres, 1)
        probes = [S.generator(pres, rng) for _ in range(args.samples)]
    rep.data = zc.summary()
    rep.checks.extend(verify_centrality(zc, probes, backend, parse_scalar(args.z), parse_scalar(args.alpha)))


def verify_canonical_centrality(args, pres, rng, rep, backend):
    from poissonlr.central import _same, canonical_Z

    if backend == "proof":
        raise UsageError("centrality scripts are written for function-backed presentations")
    zt = canonical_Z(pres)
    from poissonlr.engine.terms import Lie, commutator

    for _ in range(args.samples):
        A = S.generator(pres, rng)
        label = print_term(A, _names(pres))
        for stmt, t in (("{[q1, p1], A} = 0", Lie(zt, A)), ("[[q1, p1], A] = 0", commutator(zt, A))):
            ok, w = _same(pres, backend, t, ZERO_T, parse_scalar(args.z), parse_scalar(args.alpha))
            rep.checks.append(check(f"{stmt} for {label}", backend, ok, **w))


def verify_localization_cmd(args, pres, rng, rep):
    from poissonlr.central import verify_localization

    backends = [args.backend] if args.backend else ["central", "classical", "quantum"]
    for _ in range(args.samples):
        for g, A in (S.disjoint_case(pres, rng), S.plateau_case(pres, rng)):
            rep.checks.extend(verify_localization(pres, g, A, backends))


def verify_stabilization_cmd(args, pres, rng, rep):
    from poissonlr.central import build_Z_sequence, verify_stabilization

    seq = build_Z_sequence(pres, nmax=4)
    for _ in range(args.samples):
        rep.checks.append(verify_stabilization(seq, S.localized_probe(pres, rng, reach=4)))


def verify_homomorphism_cmd(args, pres, rng, rep):
    from poissonlr.realize.checks import check_homomorphism, check_rule_instances, make_realization, rule_instances

    backends = [args.backend] if args.backend in ("classical", "quantum") else (
        ["quantum"] if pres.kind == "current" else ["classical", "quantum"])
    pairs = [(S.generator(pres, rng), S.generator(pres, rng)) for _ in range(args.samples)]
    inst = rule_instances(pres, rng, args.samples)
    for b in backends:
        r = make_realization(pres, b, parse_scalar(args.z), parse_scalar(args.alpha))
        rep.checks.extend(check_homomorphism(pairs, r))
        rep.checks.extend(check_rule_instances(inst, r))


def verify_weyl_cmd(args, pres, rng, rep):
    from poissonlr.realize.crossed import group_law_check, weyl_relation_check

    for _ in range(args.samples):
        lam, c, z, f, _ = S.rigid_instance(pres, rng)
        if args.z is not None:
            z = as_q(args.z)
        res = weyl_relation_check(pres, lam, f, c, z, as_q(args.alpha or 0))
        label = f"lam = {lam}, v = {c} D, z = {z}"
        rep.checks.append(check(f"U_lam f = (shifted f) U_lam for {label}", "crossed", res["relation"],
                                shift=str(res["shift"])))
        rep.checks.append(check(f"series conjugation equals the translation for {label}", "crossed",
                                res["series_matches_translation"]))
        rep.checks.append(check(f"U(mu Z) is central for {label}", "crossed", res["uz_central"]))
        rep.checks.append(check(f"U_lam U_mu = U_(lam+mu) for {label}", "crossed",
                                group_law_check(pres, lam, mpq(1, 3), c, z)))


def verify_flow_cmd(args, pres, rng, rep):
    from poissonlr.realize.crossed import flow_derivative_check

    for _ in range(args.samples):
        _, c, _, f, w = S.rigid_instance(pres, rng)
        for payload, what in ((Fn(f), "function"), (w, "field")):
            res = flow_derivative_check(pres, c, payload)
            rep.checks.append(check(f"d/dlam at 0 of the pulled-back {what} equals {{v, A}} for v = {c} D",
                                    "flow", res["ok"], pieces=str(res["pieces"])))


_VERIFY = {
    "thm31": verify_thm31, "centrality": verify_centrality_cmd, "localization": verify_localization_cmd,
    "stabilization": verify_stabilization_cmd, "homomorphism": verify_homomorphism_cmd,
    "weyl": verify_weyl_cmd, "flow": verify_flow_cmd,
}


_SCOPE = {
    "localization": ("circle", "line"), "stabilization": ("line",), "weyl": ("circle", "line"),
    "flow": ("circle", "line"),
}


def cmd_verify(args, pres):
    kinds = _SCOPE.get(args.target)
    if kinds and pres.kind not in kinds:
        raise UsageError(f"verify {args.target} applies to {' and '.join(kinds)} presentations")
    rep = Report(f"verify {args.target}", pres.tag)
    rng = random.Random(args.seed)
    _VERIFY[args.target](args, pres, rng, rep)
    rep.data.setdefault("samples", args.samples)
    rep.data.setdefault("seed", args.seed)
    return rep


def cmd_realize(args, pres, rep):
    from poissonlr.realize.checks import make_realization

    backend = args.backend or "quantum"
    if backend not in ("classical", "quantum"):
        raise UsageError("realize needs --backend classical or quantum")
    r = make_realization(pres, backend, parse_scalar(args.z), parse_scalar(args.alpha))
    texts, terms = _exprs(args, pres)
    rep.data = {"backend": backend, "inputs": texts, "images": [r(t).serialize() for t in terms]}


def cmd_selftest(args, pres):
    from poissonlr.acceptance import run_criteria

    only = args.only.split(",") if args.only else None
    rep = Report("selftest", "")
    results = run_criteria(only, args.seed)
    for r in results:
        rep.checks.append(check(f"criterion {r.number} [{r.name}]", "acceptance", r.ok,
                                **{k: json.dumps(v, sort_keys=True, default=str) for k, v in r.detail.items()}))
    rep.data = {"lines": [r.line() for r in results]}
    return rep


# ---------------------------------------------------------------------------


def run(argv) -> tuple:
    """Execute ``argv``; returns ``(report, exit_code, format)``."""
    fmt = "json" if "--format" in argv and "json" in argv else "text"
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return Report("usage", errors=[str(exc)]), EXIT_USAGE, fmt
    fmt = args.format
    command = " ".join([args.command] + ([args.target] if args.command == "verify" else []))
    try:
        pres = builtin("circle") if args.command == "selftest" else load_pres(args.presentation)
        if args.command == "build-z":
            rep = cmd_build_z(args, pres)
        elif args.command == "verify":
            rep = cmd_verify(args, pres)
        elif args.command == "selftest":
            rep = cmd_selftest(args, pres)
        else:
            rep = Report(command, pres.tag)
            {"normalize": cmd_normalize, "equal": cmd_equal, "derive-farkas": cmd_derive_farkas,
             "realize": cmd_realize}[args.command](args, pres, rep)
    except (UsageError, ParseError, KeyError, ValueError, CoverError, ProofError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        kind = type(exc).__name__
        return Report(command, errors=[f"{kind}: {msg}"]), EXIT_USAGE, fmt
    except Exception as exc:  # noqa: BLE001 - the CLI never ends in a traceback
        return Report(command, errors=[f"internal error {type(exc).__name__}: {exc}"]), EXIT_USAGE, fmt
    rep.command = command
    return rep, (EXIT_PASS if rep.ok else EXIT_FAIL), fmt


def emit_report(report: Report, fmt: str = "text", seconds: float | None = None) -> str:
    if fmt == "json":
        return json.dumps(report.record(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    lines = [f"# {report.command}" + (f" on {report.presentation}" if report.presentation else "")]
    for err in report.errors:
        lines.append(f"ERROR {err}")
    for key, val in report.data.items():
        if key == "lines":
            lines.extend(val)
        elif key == "results":
            for text, res in zip(report.data.get("inputs", []), val):
                lines.append(f"{text}  ->  {res['normal_form']}" + (f"  ({res['note']})" if res["note"] else ""))
        elif key == "images":
            for text, img in zip(report.data.get("inputs", []), val):
                lines.append(f"{text}  ->")
                lines.extend("    " + ln for ln in img.splitlines())
        elif key in ("inputs", "script"):
            if key == "script":
                lines.append(f"script: {len(val['steps'])} steps")
        else:
            lines.append(f"{key}: {val}")
    for c in report.checks:
        lines.append(f"{c.verdict} [{c.backend}] {c.statement}")
        if c.verdict != "PASS":
            for k in sorted(c.witness):
                lines.append(f"    {k}: {c.witness[k]}")
    n_fail = sum(c.verdict == "FAIL" for c in report.checks)
    n_flag = sum(c.verdict == "FLAGGED" for c in report.checks)
    summary = f"{len(report.checks)} checks, {n_fail} failed, {n_flag} flagged"
    if seconds is not None:
        summary += f" ({seconds:.2f}s)"
    lines.append(summary)
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    t0 = time.perf_counter()
    rep, code, fmt = run(argv)
    out = emit_report(rep, fmt, None if fmt == "json" else time.perf_counter() - t0)
    sys.stdout.write(out)
    return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
