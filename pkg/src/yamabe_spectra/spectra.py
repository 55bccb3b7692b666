"""Exact Laplace spectra of factor manifolds.

Catalog spectra are normalized (unit sphere, interval of length pi) so that
every eigenvalue is an integer.  User spectra are read from a small
line-oriented text format, see :func:`load_spectrum`.
"""

from __future__ import annotations

import enum
import io
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import IO, Iterable, Optional, Union

from .errors import SpectrumFormatError

__all__ = [
    "Boundary",
    "SpectrumEntry",
    "FactorSpectrum",
    "sphere_spectrum",
    "interval_neumann_spectrum",
    "hemisphere_neumann_spectrum",
    "load_spectrum",
    "serialize_spectrum",
    "parse_rational",
    "format_rational",
    "synthetic_spectrum",
]


class Boundary(enum.Enum):
    CLOSED = "closed"
    NEUMANN = "neumann"


_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_rational(text) -> Fraction:
    """Parse ``p/q`` or an integer into a reduced :class:`Fraction`.

    Floats are refused so that no binary rounding can enter an exact value.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a rational written as 'p/q', got {text!r}")
    match = _RATIONAL_RE.match(text.strip())
    if match is None:
        raise ValueError(f"not a rational of the form p/q: {text!r}")
    num, den = match.groups()
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(value: Fraction) -> str:
    """Canonical text form: lowest terms, positive denominator, ``p`` if integral."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class SpectrumEntry:
    label: int
    eigenvalue: Fraction
    multiplicity: int


@dataclass(frozen=True)
class FactorSpectrum:
    """Distinct Laplace eigenvalues of one factor, with multiplicities.

    ``truncation_bound`` certifies completeness: every eigenvalue of the
    factor that is ``<= truncation_bound`` appears in ``entries``.
    """

    name: str
    dimension: int
    scalar_curvature: Fraction
    boundary: Boundary
    entries: tuple[SpectrumEntry, ...]
    truncation_bound: Fraction
    harmonically_free: Optional[bool] = None
    _by_label: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "scalar_curvature", Fraction(self.scalar_curvature))
        object.__setattr__(self, "truncation_bound", Fraction(self.truncation_bound))
        object.__setattr__(self, "entries", tuple(self.entries))
        _check_invariants(self.dimension, self.boundary, self.entries, self.truncation_bound)
        object.__setattr__(self, "_by_label", {e.label: e for e in self.entries})

    @property
    def eigenvalues(self) -> tuple[Fraction, ...]:
        return tuple(e.eigenvalue for e in self.entries)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(e.multiplicity for e in self.entries)

    def entry(self, label: int) -> SpectrumEntry:
        try:
            return self._by_label[label]
        except (KeyError, TypeError):
            raise IndexError(f"label {label!r} not in spectrum {self.name!r}") from None

    def entries_up_to(self, cap: Fraction) -> list[SpectrumEntry]:
        """Entries with eigenvalue <= cap (caller is responsible for the bound check)."""
        return [e for e in self.entries if e.eigenvalue <= cap]

    def index_of(self, value: Fraction) -> Optional[int]:
        """Label whose eigenvalue equals ``value`` exactly, else None."""
        for e in self.entries:
            if e.eigenvalue == value:
                return e.label
        return None

    def replace(self, **changes) -> "FactorSpectrum":
        fields = dict(
            name=self.name,
            dimension=self.dimension,
            scalar_curvature=self.scalar_curvature,
            boundary=self.boundary,
            entries=self.entries,
            truncation_bound=self.truncation_bound,
            harmonically_free=self.harmonically_free,
        )
        fields.update(changes)
        return FactorSpectrum(**fields)


def _check_invariants(dimension, boundary, entries, truncation_bound, line_of=None):
    def fail(msg, label=None):
        line = line_of(label) if (line_of is not None and label is not None) else None
        raise SpectrumFormatError(msg, line=line)

    if not isinstance(dimension, int) or dimension < 1:
        fail(f"dimension must be a positive integer, got {dimension!r}")
    if not isinstance(boundary, Boundary):
        fail(f"boundary must be a Boundary, got {boundary!r}")
    if not entries:
        fail("spectrum has no entries; λ₀ = 0 required")
    for pos, e in enumerate(entries):
        if e.label != pos:
            fail(f"labels must be consecutive from 0; expected {pos}, got {e.label}", e.label)
        if e.multiplicity < 1:
            fail(f"multiplicity must be positive (label {e.label})", e.label)
        if e.eigenvalue < 0:
            fail(f"eigenvalue must be non-negative (label {e.label})", e.label)
        if pos > 0 and e.eigenvalue <= entries[pos - 1].eigenvalue:
            fail("eigenvalues not strictly increasing", e.label)
    if entries[0].eigenvalue != 0:
        fail("λ₀ = 0 required", 0)
    if truncation_bound < entries[-1].eigenvalue:
        fail("truncation_bound is smaller than the largest listed eigenvalue")


def _binom(a: int, b: int) -> int:
    if a < 0 or a < b:
        return 0
    return comb(a, b)


def sphere_spectrum(n: int, k_max: int) -> FactorSpectrum:
    """Laplace spectrum of the unit round sphere S^n, degrees 0..k_max."""
    if n < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {n}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    entries = tuple(
        SpectrumEntry(k, Fraction(k * (k + n - 1)), _binom(n + k, n) - _binom(n + k - 2, n))
        for k in range(k_max + 1)
    )
    return FactorSpectrum(
        name=f"S^{n}",
        dimension=n,
        scalar_curvature=Fraction(n * (n - 1)),
        boundary=Boundary.CLOSED,
        entries=entries,
        truncation_bound=Fraction(k_max * (k_max + n - 1)),
        # the circle's eigenspace representations are pairwise equivalent
        harmonically_free=n >= 2,
    )


def interval_neumann_spectrum(k_max: int) -> FactorSpectrum:
    """Neumann spectrum of [0, pi]: k^2 with eigenfunctions cos(kx)."""
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    return FactorSpectrum(
        name="[0,pi]",
        dimension=1,
        scalar_curvature=Fraction(0),
        boundary=Boundary.NEUMANN,
        entries=tuple(SpectrumEntry(k, Fraction(k * k), 1) for k in range(k_max + 1)),
        truncation_bound=Fraction(k_max * k_max),
    )


def hemisphere_neumann_spectrum(k_max: int) -> FactorSpectrum:
    """Neumann spectrum of the closed upper unit hemisphere in S^2.

    Degree-l harmonics Y_l^m with l - m even are symmetric under the
    equatorial reflection and so satisfy the Neumann condition; there are
    l + 1 of them.
    """
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    return FactorSpectrum(
        name="S^2_+",
        dimension=2,
        scalar_curvature=Fraction(2),
        boundary=Boundary.NEUMANN,
        entries=tuple(SpectrumEntry(l, Fraction(l * (l + 1)), l + 1) for l in range(k_max + 1)),
        truncation_bound=Fraction(k_max * (k_max + 1)),
    )


# -- file format -------------------------------------------------------------

_HEADER_KEYS = (
    "name",
    "dimension",
    "scalar_curvature",
    "boundary",
    "truncation_bound",
    "harmonically_free",
)
_REQUIRED_KEYS = ("name", "dimension", "scalar_curvature", "boundary", "truncation_bound")


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data


def load_spectrum(source: Union[bytes, str, IO]) -> FactorSpectrum:
    """Parse a spectrum file.

    ``source`` may be raw bytes, a decoded string, or a binary/text file
    object.  Errors carry the offending line and field.
    """
    text = _read_text(source)
    headers: dict[str, tuple[str, int]] = {}
    entry_rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(io.StringIO(text, newline=None), start=1):
        line = raw.rstrip("\r\n").strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and not entry_rows:
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _HEADER_KEYS:
                raise SpectrumFormatError(f"unknown header key {key!r}", line=lineno, field=key)
            if key in headers:
                raise SpectrumFormatError("duplicate header", line=lineno, field=key)
            headers[key] = (value.strip(), lineno)
            continue
        parts = line.split("#", 1)[0].split()
        if len(parts) != 3:
            raise SpectrumFormatError(
                "entry lines must read '<label> <p>/<q> <mult>'", line=lineno, field="entry"
            )
        entry_rows.append((lineno, parts))

    for key in _REQUIRED_KEYS:
        if key not in headers:
            raise SpectrumFormatError(f"missing header {key!r}", field=key)

    def header(key, convert):
        value, lineno = headers[key]
        try:
            return convert(value)
        except (ValueError, KeyError) as exc:
            raise SpectrumFormatError(str(exc), line=lineno, field=key) from None

    def to_hf(value):
        table = {"true": True, "false": False, "unknown": None}
        if value not in table:
            raise ValueError(f"expected true|false|unknown, got {value!r}")
        return table[value]

    def to_boundary(value):
        try:
            return Boundary(value)
        except ValueError:
            raise ValueError(f"expected closed|neumann, got {value!r}") from None

    def to_dimension(value):
        dim = int(value)
        if dim < 1:
            raise ValueError("dimension must be a positive integer")
        return dim

    entries = []
    line_by_label = {}
    for lineno, (label_s, value_s, mult_s) in entry_rows:
        try:
            label = int(label_s)
        except ValueError:
            raise SpectrumFormatError(f"bad label {label_s!r}", line=lineno, field="label") from None
        try:
            eigenvalue = parse_rational(value_s)
        except ValueError as exc:
            raise SpectrumFormatError(str(exc), line=lineno, field="eigenvalue") from None
        try:
            mult = int(mult_s)
        except ValueError:
            raise SpectrumFormatError(
                f"bad multiplicity {mult_s!r}", line=lineno, field="multiplicity"
            ) from None
        line_by_label.setdefault(label, lineno)
        entries.append(SpectrumEntry(label, eigenvalue, mult))

    kwargs = dict(
        name=headers["name"][0],
        dimension=header("dimension", to_dimension),
        scalar_curvature=header("scalar_curvature", parse_rational),
        boundary=header("boundary", to_boundary),
        entries=tuple(entries),
        truncation_bound=header("truncation_bound", parse_rational),
        harmonically_free=header("harmonically_free", to_hf) if "harmonically_free" in headers else None,
    )
    # same scan the constructor runs, but with line numbers attached
    _check_invariants(
        kwargs["dimension"], kwargs["boundary"], kwargs["entries"], kwargs["truncation_bound"],
        line_of=line_by_label.get,
    )
    return FactorSpectrum(**kwargs)


def serialize_spectrum(spectrum: FactorSpectrum) -> str:
    hf = {True: "true", False: "false", None: "unknown"}[spectrum.harmonically_free]
    lines = [
        f"name={spectrum.name}",
        f"dimension={spectrum.dimension}",
        f"scalar_curvature={format_rational(spectrum.scalar_curvature)}",
        f"boundary={spectrum.boundary.value}",
        f"truncation_bound={format_rational(spectrum.truncation_bound)}",
        f"harmonically_free={hf}",
    ]
    lines.extend(
        f"{e.label} {format_rational(e.eigenvalue)} {e.multiplicity}" for e in spectrum.entries
    )
    return "\n".join(lines) + "\n"


def synthetic_spectrum(
    name: str,
    eigenvalues: Iterable,
    multiplicities: Iterable[int],
    *,
    dimension: int,
    scalar_curvature,
    boundary: Boundary,
    truncation_bound=None,
    harmonically_free: Optional[bool] = None,
) -> FactorSpectrum:
    """Build a spectrum from plain lists; handy for fixtures and tests."""
    values = [parse_rational(v) if isinstance(v, str) else Fraction(v) for v in eigenvalues]
    entries = tuple(SpectrumEntry(k, v, int(mu)) for k, (v, mu) in enumerate(zip(values, multiplicities)))
    bound = values[-1] if truncation_bound is None else Fraction(truncation_bound)
    return FactorSpectrum(
        name=name,
        dimension=dimension,
        scalar_curvature=Fraction(scalar_curvature),
        boundary=boundary,
        entries=entries,
        truncation_bound=bound,
        harmonically_free=harmonically_free,
    )
