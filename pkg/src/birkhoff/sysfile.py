"""Line-oriented system files.

Grammar (one directive per line, ``#`` starts a comment)::

    dof <n>
    order <m>
    freqbasis <d>
    freq <j> <re>,<im> ... (d entries)
    numericfreq <l> <re> <im>
    hamiltonian
    integral <i>
    generator <k>
    term <re>,<im> : a_1 ... a_n b_1 ... b_n

``term`` lines belong to the most recent block header (``hamiltonian`` by
default).  Coefficients are rationals ``p`` or ``p/q``; decimal literals
make the file a float file.  Repeated monomials within a block are summed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .coeffs import GaussQ, format_rational, parse_rational
from .errors import ParseError, ValidationError
from .resonance import FrequencyModel
from .series import TruncatedSeries

_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?(inf|nan)$")


@dataclass
class SystemSpec:
    n: int
    order: int
    H: TruncatedSeries
    freq: FrequencyModel | None = None
    integrals: dict = field(default_factory=dict)
    generators: dict = field(default_factory=dict)
    declared_numeric: bool = False

    @property
    def exact(self) -> bool:
        return self.H.exact

    def momentum_functions(self):
        """``(H, G_2, ..., G_n)``; missing integrals raise ValidationError."""
        missing = [i for i in range(2, self.n + 1) if i not in self.integrals]
        if missing:
            raise ValidationError(f"first integrals {missing} are not declared")
        return [self.H] + [self.integrals[i] for i in range(2, self.n + 1)]

    def generator_list(self):
        if not self.generators:
            return []
        lo, hi = min(self.generators), max(self.generators)
        if lo < 3:
            raise ValidationError("generators start at degree 3")
        zero = TruncatedSeries.zero(self.n, hi, self.exact)
        return [self.generators.get(k, zero) for k in range(3, hi + 1)]


class _Reader:
    def __init__(self, text):
        self.lines = text.splitlines()

    def __iter__(self):
        for no, raw in enumerate(self.lines, 1):
            line = raw.split("#", 1)[0]
            if line.strip():
                yield no, raw, line


def _col(raw, token):
    i = raw.find(token)
    return i + 1 if i >= 0 else 1


def _int(tok, no, raw, what, low=None):
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {tok!r}", no, _col(raw, tok)) from None
    if low is not None and v < low:
        raise ParseError(f"{what} must be >= {low}, got {v}", no, _col(raw, tok))
    return v


def _coef(tok, no, raw):
    """``(value, is_float)`` for a coefficient token ``re`` or ``re,im``."""
    parts = tok.split(",")
    if len(parts) > 2:
        raise ParseError(f"bad coefficient {tok!r}", no, _col(raw, tok))
    try:
        return GaussQ(*(parse_rational(p) for p in parts)), False
    except ValueError:
        pass
    if all(_FLOAT_RE.match(p.strip()) for p in parts):
        vals = [float(p) for p in parts] + [0.0]
        return complex(vals[0], vals[1]), True
    raise ParseError(f"bad coefficient {tok!r}", no, _col(raw, tok))


def parse_system(text: str, validate: bool = True) -> SystemSpec:
    """Parse and validate a system file."""
    n = order = d = None
    freq_rows = {}
    numeric = {}
    blocks = {("hamiltonian", 0): {}}
    current = ("hamiltonian", 0)
    any_float = False
    for no, raw, line in _Reader(text):
        toks = line.split()
        key = toks[0]
        if key == "dof":
            if len(toks) != 2 or n is not None:
                raise ParseError("expected a single 'dof <n>'", no, 1)
            n = _int(toks[1], no, raw, "dof", 1)
        elif key == "order":
            if len(toks) != 2:
                raise ParseError("expected 'order <m>'", no, 1)
            order = _int(toks[1], no, raw, "order", 2)
        elif key == "freqbasis":
            if len(toks) != 2:
                raise ParseError("expected 'freqbasis <d>'", no, 1)
            d = _int(toks[1], no, raw, "freqbasis", 1)
        elif key == "freq":
            if d is None:
                raise ParseError("'freq' before 'freqbasis'", no, 1)
            if len(toks) != 2 + d:
                raise ParseError(f"'freq' needs an index and {d} coordinates", no, 1)
            j = _int(toks[1], no, raw, "frequency index", 1)
            row = []
            for tok in toks[2:]:
                c, is_float = _coef(tok, no, raw)
                if is_float:
                    raise ParseError("frequency coordinates must be exact rationals", no, _col(raw, tok))
                row.append(c)
            if j in freq_rows:
                raise ParseError(f"frequency {j} declared twice", no, 1)
            freq_rows[j] = row
        elif key == "numericfreq":
            if len(toks) != 4:
                raise ParseError("expected 'numericfreq <l> <re> <im>'", no, 1)
            l = _int(toks[1], no, raw, "basis index", 1)
            try:
                numeric[l] = complex(float(toks[2]), float(toks[3]))
            except ValueError:
                raise ParseError("numeric frequency parts must be numbers", no, _col(raw, toks[2])) from None
        elif key in ("hamiltonian", "integral", "generator"):
            if key == "hamiltonian":
                if len(toks) != 1:
                    raise ParseError("'hamiltonian' takes no arguments", no, 1)
                current = ("hamiltonian", 0)
            else:
                if len(toks) != 2:
                    raise ParseError(f"expected '{key} <index>'", no, 1)
                current = (key, _int(toks[1], no, raw, f"{key} index", 2 if key == "integral" else 3))
            blocks.setdefault(current, {})
        elif key == "term":
            if n is None:
                raise ParseError("'term' before 'dof'", no, 1)
            body = line.split(None, 1)[1] if len(toks) > 1 else ""
            if ":" not in body:
                raise ParseError("expected 'term <coef> : <exponents>'", no, _col(raw, "term") + 5)
            ctext, etext = body.split(":", 1)
            ctoks = ctext.split()
            if len(ctoks) != 1:
                raise ParseError("expected exactly one coefficient", no, _col(raw, ctext.strip() or ":"))
            c, is_float = _coef(ctoks[0], no, raw)
            any_float |= is_float
            etoks = etext.split()
            if len(etoks) != 2 * n:
                after = raw.find(":") + 1
                col = after + len(etext) - len(etext.lstrip()) + 1
                raise ParseError(f"expected {2 * n} exponents, got {len(etoks)}", no, col)
            mono = tuple(_int(t, no, raw, "exponent", 0) for t in etoks)
            terms = blocks[current]
            terms.setdefault(mono, []).append(c)
        else:
            raise ParseError(f"unknown directive {key!r}", no, _col(raw, key))
    if n is None:
        raise ParseError("missing 'dof'", 0, 0)

    def build(terms):
        summed = {}
        for mono, cs in terms.items():
            if any_float:
                summed[mono] = sum((complex(c) for c in cs), 0j)
            else:
                acc = GaussQ(0)
                for c in cs:
                    acc = acc + c
                summed[mono] = acc
        deg = max((sum(m) for m in summed), default=2)
        return TruncatedSeries(n, max(deg, order or 2, 2), summed, exact=not any_float)

    H = build(blocks.pop(("hamiltonian", 0)))
    integrals = {i: build(t) for (k, i), t in sorted(blocks.items()) if k == "integral"}
    gens = {i: build(t) for (k, i), t in sorted(blocks.items()) if k == "generator"}
    for i in integrals:
        if i > n:
            raise ValidationError(f"integral {i} exceeds dof {n}")

    freq = None
    if freq_rows:
        if sorted(freq_rows) != list(range(1, n + 1)):
            raise ValidationError(f"need 'freq' lines for j = 1..{n}")
        num = None
        if numeric:
            if sorted(numeric) != list(range(1, d + 1)):
                raise ValidationError(f"need 'numericfreq' lines for l = 1..{d}")
            num = [numeric[l] for l in range(1, d + 1)]
        freq = FrequencyModel([freq_rows[j] for j in range(1, n + 1)], numeric=num)
    elif numeric:
        raise ValidationError("'numericfreq' without a frequency model")
    spec = SystemSpec(n, order if order is not None else max(H.order, 3), H, freq, integrals, gens,
                      declared_numeric=bool(numeric))
    if validate:
        validate_system(spec)
    return spec


def validate_system(spec: SystemSpec, tol: float = 1e-9):
    """Check the quadratic part against the declared frequency model."""
    from .quadratic import eigen_symplectic_basis, quadratic_data

    H2 = spec.H.homogeneous_part(2)
    low = [m for m in spec.H.terms if sum(m) < 2]
    if low:
        raise ValidationError("Hamiltonian has constant or linear terms")
    if H2.is_zero():
        raise ValidationError("Hamiltonian has no quadratic part")
    qd = quadratic_data(H2)
    if qd.is_canonical():
        gam = tuple(qd.frequencies())
    else:
        _, gam = eigen_symplectic_basis(qd.S)
        gam = tuple(gam)
    if spec.freq is None:
        if not all(isinstance(g, GaussQ) for g in gam):
            raise ValidationError("irrational frequencies need an explicit frequency model")
        spec.freq = FrequencyModel.rational(gam)
        return spec
    F = spec.freq
    if F.n != spec.n:
        raise ValidationError(f"frequency model has {F.n} rows for dof {spec.n}")
    if F.has_exact_values and all(isinstance(g, GaussQ) for g in gam):
        want = F.exact_gamma()
        if tuple(gam) != tuple(want):
            raise ValidationError(
                "quadratic part frequencies (" + ", ".join(g.format() for g in gam)
                + ") differ from the declared model (" + ", ".join(w.format() for w in want) + ")")
        return spec
    if F.numeric is None:
        raise ValidationError("frequency basis of dimension > 1 needs 'numericfreq' values")
    want = F.numeric_gamma()
    scale = max(1.0, max(abs(w) for w in want))
    for j, (g, w) in enumerate(zip(gam, want), 1):
        if abs(complex(g) - w) > tol * scale:
            raise ValidationError(f"gamma_{j} = {complex(g)} differs from the model value {w}")
    return spec


def _format_coef(c, exact: bool) -> str:
    if exact:
        return c.format()
    return f"{c.real!r},{c.imag!r}"


def _emit_terms(A: TruncatedSeries, out):
    for mono, c in A.items():
        out.append(f"term {_format_coef(c, A.exact)} : " + " ".join(map(str, mono)))


def emit_system(spec: SystemSpec, comments=()) -> str:
    """Canonical text of a system; ``parse_system(emit_system(s))`` reproduces ``s``."""
    out = [f"# {c}" for c in comments]
    out.append(f"dof {spec.n}")
    out.append(f"order {spec.order}")
    F = spec.freq
    if F is not None:
        out.append(f"freqbasis {F.d}")
        for j, row in enumerate(F.coords, 1):
            out.append(f"freq {j} " + " ".join(c.format() for c in row))
        if spec.declared_numeric and F.numeric is not None:
            for l, v in enumerate(F.numeric, 1):
                out.append(f"numericfreq {l} {v.real!r} {v.imag!r}")
    out.append("hamiltonian")
    _emit_terms(spec.H, out)
    for i in sorted(spec.integrals):
        out.append(f"integral {i}")
        _emit_terms(spec.integrals[i], out)
    for k in sorted(spec.generators):
        out.append(f"generator {k}")
        _emit_terms(spec.generators[k], out)
    return "\n".join(out) + "\n"


def format_vector(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def format_exact(c) -> str:
    """``GaussQ`` as ``a`` or ``a+bi`` for reports."""
    if not c.im:
        return format_rational(c.re)
    if not c.re:
        return f"{format_rational(c.im)}i"
    sign = "-" if c.im < 0 else "+"
    return f"{format_rational(c.re)}{sign}{format_rational(abs(c.im))}i"
