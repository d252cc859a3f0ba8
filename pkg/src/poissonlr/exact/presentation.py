"""Lie-Rinehart presentations: generator payloads and their oracles.

A presentation decides what a generator is (a function, a vector field, a
frame field, a canonical symbol, or a current-algebra symbol), how two
generators bracket, and how functions multiply and act on fields.  Oracle
results are linear combinations ``[(scalar, payload | None)]`` where
``None`` stands for the identity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import yaml
from gmpy2 import mpq

from poissonlr.exact.piecewise import (
    CIRCLE, LINE, SMOOTH, PiecewiseFunction, VectorField, bump, parse_function,
    serialize_function,
)
from poissonlr.exact.scalar import ONE, Poly, _mono_sort_key, as_q

# ---------------------------------------------------------------------------
# payloads


class Payload:
    """Base class; subclasses are hashable and totally ordered by ``key``."""

    rank = 9
    is_function = False  # commutative function generator of an LR algebra
    is_field = False

    def key(self):
        raise NotImplementedError

    def __lt__(self, other):
        return self.key() < other.key()


@dataclass(frozen=True, eq=True)
class Fn(Payload):
    f: PiecewiseFunction
    rank = 0
    is_function = True

    def key(self):
        return (0,) + self.f.key()

    def conj(self):
        return Fn(self.f.conj())

    def text(self):
        return f"fn<{serialize_function(self.f)}>"


@dataclass(frozen=True, eq=True)
class Frame(Payload):
    domain: str
    rank = 1
    is_field = True

    def key(self):
        return (1, self.domain)

    @property
    def field(self):
        return VectorField(PiecewiseFunction.constant(1, self.domain), check=False)

    def conj(self):
        return self

    def text(self):
        return "D"


@dataclass(frozen=True, eq=True)
class Vf(Payload):
    v: VectorField
    rank = 2
    is_field = True

    def key(self):
        return (2,) + self.v.key()

    @property
    def field(self):
        return self.v

    def conj(self):
        return Vf(VectorField(self.v.coefficient.conj(), check=False))

    def text(self):
        return f"vec<{serialize_function(self.v.coefficient)}>"


@dataclass(frozen=True, eq=True)
class Sym(Payload):
    letter: str  # "q" or "p"
    index: int

    @property
    def rank(self):
        return 0 if self.letter == "q" else 2

    def key(self):
        return (self.rank, self.index)

    def conj(self):
        return self

    def text(self, n=None):
        return f"{self.letter}{self.index}"


@dataclass(frozen=True, eq=True)
class Rho(Payload):
    f: PiecewiseFunction
    rank = 0

    def key(self):
        return (0,) + self.f.key()

    def conj(self):
        return Rho(self.f.conj())

    def text(self):
        return f"rho<{serialize_function(self.f)}>"


@dataclass(frozen=True, eq=True)
class Cur(Payload):
    v: VectorField
    rank = 2

    def key(self):
        return (2,) + self.v.key()

    def conj(self):
        return Cur(VectorField(self.v.coefficient.conj(), check=False))

    def text(self):
        return f"j<{serialize_function(self.v.coefficient)}>"


def _lead(f: PiecewiseFunction):
    """Rational coefficient of the lowest monomial of the first non-zero
    piece; current generators are stored divided by it, so that rational
    multiples of one generator share a single symbol."""
    for piece in f.pieces:
        if piece:
            return piece.terms[min(piece.terms, key=_mono_sort_key)]
    return mpq(1)


def _scale(lin, c):
    return [(s * c, p) for s, p in lin]


# ---------------------------------------------------------------------------
# presentations

KINDS = ("circle", "line", "canonical", "current")


@dataclass
class Presentation:
    kind: str
    smoothness: int = 3
    grid: int = 8
    n: int = 0
    cover: list = field(default_factory=list)
    named: dict = field(default_factory=dict)
    lr_enabled: bool = True
    has_identity: bool = True
    compact: bool = True
    frame: list = field(default_factory=list)
    domain: str | None = None
    tag: str = ""

    # -- structure ----------------------------------------------------------
    @property
    def framed(self) -> bool:
        return bool(self.frame)

    @property
    def finite(self) -> bool:
        return self.kind == "canonical"

    @property
    def function_backed(self) -> bool:
        return self.kind in ("circle", "line")

    def digest(self) -> str:
        parts = [self.kind, str(self.smoothness), str(self.grid), str(self.n)]
        parts += [f"{a}:{b}" for a, b in self.cover]
        parts += [f"{k}={self.named[k].text()}" for k in sorted(self.named)]
        import hashlib

        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]

    # -- canonical generator forms -------------------------------------------
    def canon(self, p: Payload) -> list:
        """Rewrite a payload into its canonical linear combination."""
        if isinstance(p, Fn):
            if p.f.is_constant():
                c = p.f.constant_value()
                return [(c, None)] if c else []
            return [(ONE, p)]
        if isinstance(p, Vf):
            h = p.v.coefficient
            if h.is_zero():
                return []
            if h.is_constant() and self.framed:
                return [(h.constant_value(), self.frame[0])]
            return [(ONE, p)]
        if isinstance(p, Rho):
            if p.f.is_constant():
                c = p.f.constant_value()
                return [(c, None)] if c else []
            c = _lead(p.f)
            return [(ONE, p)] if c == 1 else [(Poly.const(c), Rho(p.f * (1 / c)))]
        if isinstance(p, Cur):
            h = p.v.coefficient
            if h.is_zero():
                return []
            c = _lead(h)
            if c == 1:
                return [(ONE, p)]
            return [(Poly.const(c), Cur(VectorField(h * (1 / c), check=False)))]
        return [(ONE, p)]

    def fn(self, f: PiecewiseFunction) -> list:
        return self.canon(Fn(f))

    def vf(self, h: PiecewiseFunction) -> list:
        """Canonical form of the field ``h * d/dx``; on the line a constant
        tail is split off as a multiple of the formal frame field."""
        if self.kind == "line" and not h.is_constant():
            c = h.tail()
            if c:
                rest = self.canon(Vf(VectorField(h - c, check=False)))
                return rest + [(c, self.frame[0])]
        if h.is_constant():
            c = h.constant_value()
            return [(c, self.frame[0])] if c else []
        return self.canon(Vf(VectorField(h, check=False)))

    def field_of(self, p) -> VectorField:
        if isinstance(p, (Frame, Vf)):
            return p.field
        if isinstance(p, Cur):
            return p.v
        raise TypeError(f"{p!r} is not a vector generator")

    # -- oracles ---------------------------------------------------------------
    def bracket(self, a: Payload | None, b: Payload | None) -> list:
        """Lie product of two generators as a linear combination."""
        if a is None or b is None:
            return []
        k = self.kind
        if k == "canonical":
            if a.index == b.index and a.letter != b.letter:
                return [(ONE if a.letter == "q" else -ONE, None)]
            return []
        if k == "current":
            if isinstance(a, Rho) and isinstance(b, Rho):
                return []
            if isinstance(a, Cur) and isinstance(b, Rho):
                return self.canon(Rho(a.v.act(b.f)))
            if isinstance(a, Rho) and isinstance(b, Cur):
                return _scale(self.canon(Rho(b.v.act(a.f))), -ONE)
            return self.canon(Cur(a.v.bracket(b.v)))
        if a.is_function and b.is_function:
            return []
        if a.is_field and b.is_function:
            return self.fn(self.field_of(a).act(b.f))
        if a.is_function and b.is_field:
            return _scale(self.fn(self.field_of(b).act(a.f)), -ONE)
        c = self.field_of(a).bracket(self.field_of(b))
        return self.vf(c.coefficient)

    def lr(self, f: Payload | None, v: Payload) -> list:
        """``f o v`` for a function generator and a vector generator."""
        if not self.lr_enabled:
            raise ValueError("LR product is not part of this presentation")
        h = self.field_of(v).coefficient
        if f is None:
            return [(ONE, v)]
        return self.vf(f.f * h)

    def fmul(self, f: Payload, g: Payload) -> list:
        return self.fn(f.f * g.f)

    def frame_coefficient(self, p: Payload) -> PiecewiseFunction:
        return self.field_of(p).coefficient

    def one_function(self) -> PiecewiseFunction:
        return PiecewiseFunction.constant(1, self.domain or CIRCLE)

    # -- sampling ------------------------------------------------------------
    def _rand_q(self, rng, lo=-3, hi=3):
        while True:
            c = mpq(rng.randint(lo * 4, hi * 4), rng.choice((1, 2, 4)))
            if c:
                return c

    def random_bump(self, rng: random.Random, width=None, lo=None, hi=None):
        g = self.grid
        dom = self.domain
        if dom == CIRCLE:
            a = mpq(rng.randrange(g), g)
            span = rng.randint(2, max(2, g - 2))
        else:
            lo = -2 * g if lo is None else int(lo * g)
            hi = 2 * g if hi is None else int(hi * g)
            span = rng.randint(2, max(2, min(2 * g, hi - lo)))
            a = mpq(rng.randint(lo, hi - span), g)
        if width is not None:
            span = width
        b = a + mpq(span, g)
        c = a + mpq(1, 2 * g)
        d = b - mpq(1, 2 * g)
        return bump(dom, a, c, d, b, self.smoothness)

    def random_function(self, rng: random.Random, constant=True) -> PiecewiseFunction:
        f = self.random_bump(rng) * self._rand_q(rng)
        if rng.random() < 0.3:
            f = f + self.random_bump(rng) * self._rand_q(rng)
        if constant and rng.random() < 0.5:
            f = f + self._rand_q(rng)
        return f

    def random_field(self, rng: random.Random) -> VectorField:
        h = self.random_function(rng, constant=self.domain == CIRCLE)
        return VectorField(h, check=False)

    def random_payload(self, rng: random.Random, kind=None) -> Payload:
        k = self.kind
        if k == "canonical":
            return Sym(rng.choice("qp"), rng.randint(1, self.n))
        if k == "current":
            if (kind or rng.choice(("f", "v"))) == "f":
                return Rho(self.random_function(rng, constant=False))
            return Cur(self.random_field(rng))
        pick = kind or rng.choice(("f", "v", "v", "D"))
        if pick == "f":
            return Fn(self.random_function(rng, constant=False))
        if pick == "D" and self.frame:
            return self.frame[0]
        return Vf(self.random_field(rng))


def _named_circle(k):
    d = mpq
    f = bump(CIRCLE, d(0), d(1, 8), d(1, 4), d(3, 8), k)
    g = bump(CIRCLE, d(1, 4), d(3, 8), d(1, 2), d(5, 8), k)
    h = bump(CIRCLE, d(1, 2), d(5, 8), d(3, 4), d(7, 8), k)
    return {
        "f": Fn(f),
        "g": Fn(g),
        "h": Fn(f * 2 - h),
        "v": Vf(VectorField(g)),
        "w": Vf(VectorField(h + f)),
        "u": Vf(VectorField(g * 3 + 1)),
        "D": Frame(CIRCLE),
    }


def _named_line(k):
    d = mpq
    f = bump(LINE, d(0), d(1, 4), d(1, 2), d(3, 4), k)
    g = bump(LINE, d(-1), d(-3, 4), d(1, 4), d(1, 2), k)
    h = bump(LINE, d(1), d(5, 4), d(3, 2), d(2), k)
    return {
        "f": Fn(f),
        "g": Fn(g),
        "h": Fn(h * 3 + 1),
        "v": Vf(VectorField(g)),
        "w": Vf(VectorField(h - f)),
        "D": Frame(LINE),
    }


def make_presentation(kind: str, smoothness: int = 3, grid: int = 8, n: int = 1,
                      base: str = "circle") -> Presentation:
    """Built-in presentations: ``circle``, ``line``, ``canonical`` (n) and
    ``current`` (over the circle)."""
    if smoothness < 2:
        raise ValueError("smoothness must be at least 2")
    if grid < 4:
        raise ValueError("grid resolution must be at least 4")
    if kind == "circle":
        return Presentation(
            "circle", smoothness, grid, cover=list(DEFAULT_COVER),
            named=_named_circle(smoothness), compact=True,
            frame=[Frame(CIRCLE)], domain=CIRCLE, tag="circle",
        )
    if kind == "line":
        return Presentation(
            "line", smoothness, grid, named=_named_line(smoothness), compact=False,
            frame=[Frame(LINE)], domain=LINE, tag="line",
        )
    if kind == "canonical":
        if n < 1:
            raise ValueError("canonical presentations need n >= 1")
        named = {}
        for i in range(1, n + 1):
            named[f"q{i}"] = Sym("q", i)
            named[f"p{i}"] = Sym("p", i)
        if n == 1:
            named["q"] = Sym("q", 1)
            named["p"] = Sym("p", 1)
        return Presentation(
            "canonical", smoothness, grid, n=n, named=named, lr_enabled=False,
            compact=True, tag=f"canonical{n}",
        )
    if kind == "current":
        if base != "circle":
            raise ValueError("current algebras are provided over the circle only")
        c = _named_circle(smoothness)
        named = {
            "rf": Rho(c["f"].f), "rg": Rho(c["g"].f), "rh": Rho(c["h"].f),
            "jv": Cur(c["v"].v), "jw": Cur(c["w"].v), "ju": Cur(c["u"].v),
        }
        return Presentation(
            "current", smoothness, grid, cover=list(DEFAULT_COVER), named=named,
            lr_enabled=False, compact=True, domain=CIRCLE, tag="current-circle",
        )
    raise ValueError(f"unsupported presentation kind {kind!r}")


DEFAULT_COVER = [(mpq(-1, 8), mpq(5, 8)), (mpq(3, 8), mpq(9, 8))]


def builtin(name: str) -> Presentation:
    """Resolve ``circle``, ``line``, ``canonical<n>`` or ``current-circle``."""
    if name in ("circle", "line"):
        return make_presentation(name)
    if name.startswith("canonical"):
        rest = name[len("canonical"):] or "1"
        if not rest.isdigit():
            raise ValueError(f"unknown presentation {name!r}")
        return make_presentation("canonical", n=int(rest))
    if name in ("current-circle", "current"):
        return make_presentation("current")
    raise ValueError(f"unknown presentation {name!r}")


# ---------------------------------------------------------------------------
# presentation description files


def _parse_generator(kind, name, spec, k, domain):
    if isinstance(spec, str):
        if spec.startswith(("q", "p")) and spec[1:].isdigit():
            return Sym(spec[0], int(spec[1:]))
        raise ValueError(f"generator {name!r}: unsupported literal {spec!r}")
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError(f"generator {name!r} needs a mapping with a 'type'")
    t = spec["type"]
    if "literal" in spec:
        f = parse_function(str(spec["literal"]))
    elif "bump" in spec:
        pts = [as_q(str(x)) for x in spec["bump"]]
        if len(pts) != 4:
            raise ValueError(f"generator {name!r}: bump needs four points")
        f = bump(domain, *pts, k)
    elif "constant" in spec:
        f = PiecewiseFunction.constant(as_q(str(spec["constant"])), domain)
    else:
        raise ValueError(f"generator {name!r}: give literal, bump or constant")
    if "scale" in spec:
        f = f * as_q(str(spec["scale"]))
    if "add" in spec:
        f = f + as_q(str(spec["add"]))
    if f.domain != domain:
        raise ValueError(f"generator {name!r} lives on the wrong domain")
    if kind == "current":
        return {"function": Rho, "field": Cur}[t](f if t == "function" else VectorField(f))
    if t == "function":
        return Fn(f)
    if t == "field":
        return Vf(VectorField(f))
    raise ValueError(f"generator {name!r}: unknown type {t!r}")


def load_presentation(text: str) -> Presentation:
    """Build a presentation from its YAML description.

    Keys: ``kind`` (circle | line | canonical | current), ``smoothness``,
    ``grid``, ``n`` (canonical), ``cover`` (list of ``[a, b]`` arcs),
    ``flags`` (only ``lr_enabled: false`` may be requested) and
    ``generators`` (name -> ``{type, bump | literal | constant, scale, add}``).
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValueError(f"presentation file is not valid YAML: {exc}") from None
    if not isinstance(data, dict) or "kind" not in data:
        raise ValueError("presentation file needs a top-level 'kind'")
    unknown = set(data) - {"kind", "smoothness", "grid", "n", "cover", "flags", "generators"}
    if unknown:
        raise ValueError(f"unknown presentation keys: {sorted(unknown)}")
    kind = data["kind"]
    pres = make_presentation(
        kind, int(data.get("smoothness", 3)), int(data.get("grid", 8)), int(data.get("n", 1))
    )
    if "cover" in data:
        if kind not in ("circle", "current", "line"):
            raise ValueError("covers only apply to function-backed presentations")
        arcs = []
        for arc in data["cover"]:
            if not isinstance(arc, (list, tuple)) or len(arc) != 2:
                raise ValueError(f"bad cover arc {arc!r}")
            arcs.append((as_q(str(arc[0])), as_q(str(arc[1]))))
        pres.cover = arcs
    flags = data.get("flags") or {}
    for key, val in flags.items():
        if key != "lr_enabled":
            raise ValueError(f"unknown flag {key!r}")
        if val and not pres.lr_enabled:
            raise ValueError("this kind cannot enable LR relations")
        pres.lr_enabled = bool(val) and pres.lr_enabled
    for name, spec in (data.get("generators") or {}).items():
        if name in ("Z", "1", "D"):
            raise ValueError(f"generator name {name!r} is reserved")
        pres.named[str(name)] = _parse_generator(
            pres.kind, name, spec, pres.smoothness, pres.domain or CIRCLE
        )
    pres.tag = f"{pres.tag}:custom"
    return pres


__all__ = [
    "Payload", "Fn", "Frame", "Vf", "Sym", "Rho", "Cur", "Presentation",
    "make_presentation", "builtin", "load_presentation", "DEFAULT_COVER", "SMOOTH",
]
