"""Eigenvalue branches of J_s on a product M1 x M2 and their zeros.

With metric g1 + s*g2, every eigenvalue of J_s on mean-zero Neumann
functions is

    sigma_ij(s) = (rho1_i - c1) + (rho2_j - c2) / s,   (i, j) != (0, 0)

where c_k = R_k / (m - 1).  Everything here is exact rational arithmetic.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DegeneratePairError, InvariantViolation, ModelError, TruncationError
from .spectra import Boundary, FactorSpectrum, SpectrumEntry, synthetic_spectrum

__all__ = [
    "ProductModel",
    "AffineEigenvalue",
    "DegeneracyInstant",
    "PairDegeneracy",
    "build_model",
    "build_affine",
    "is_pair_degenerate",
    "zero_of",
    "degeneracy_instants",
    "instant_sequences",
    "neutral_fixture",
    "sphere_hemisphere_model",
]


@dataclass(frozen=True)
class ProductModel:
    factor1: FactorSpectrum
    factor2: FactorSpectrum
    m: int
    c1: Fraction
    c2: Fraction

    @classmethod
    def from_constants(cls, factor1, factor2, c1, c2) -> "ProductModel":
        """Model with injected constants, bypassing the curvature/dimension checks.

        Used by the numerical witness, whose flat circle x interval geometry
        carries synthetic shift constants.
        """
        return cls(factor1, factor2, factor1.dimension + factor2.dimension, Fraction(c1), Fraction(c2))


@dataclass(frozen=True)
class AffineEigenvalue:
    """One branch sigma(s) = A + B/s of J_s, attached to labels (i, j)."""

    i: int
    j: int
    A: Fraction
    B: Fraction
    multiplicity: int

    def value(self, s) -> Fraction:
        return self.A + self.B / Fraction(s)

    @property
    def increasing(self) -> bool:
        return self.B < 0

    @property
    def decreasing(self) -> bool:
        return self.B > 0


@dataclass(frozen=True)
class DegeneracyInstant:
    s_star: Fraction
    vanishing: tuple[AffineEigenvalue, ...]

    def __post_init__(self):
        if not self.vanishing:
            raise InvariantViolation("a degeneracy instant needs at least one vanishing branch")
        for b in self.vanishing:
            if not (b.A * b.B < 0 and -b.B / b.A == self.s_star):
                raise InvariantViolation(f"branch ({b.i},{b.j}) does not vanish at {self.s_star}")
        i_labels = [b.i for b in self.vanishing]
        j_labels = [b.j for b in self.vanishing]
        if len(set(i_labels)) != len(i_labels) or len(set(j_labels)) != len(j_labels):
            raise InvariantViolation(
                f"vanishing branches at s*={self.s_star} share a factor label: "
                f"{[(b.i, b.j) for b in self.vanishing]}"
            )


@dataclass(frozen=True)
class PairDegeneracy:
    degenerate: bool
    witness: Optional[tuple[int, int]]

    def __bool__(self):
        return self.degenerate


def build_model(f1: FactorSpectrum, f2: FactorSpectrum) -> ProductModel:
    if f1.boundary is not Boundary.CLOSED:
        raise ModelError(f"first factor must be closed, got {f1.boundary.value}")
    if f2.boundary is not Boundary.NEUMANN:
        raise ModelError(f"second factor must carry a Neumann boundary, got {f2.boundary.value}")
    m = f1.dimension + f2.dimension
    if m < 3:
        raise ModelError(f"m ≥ 3 required, product has dimension {m}")
    return ProductModel(f1, f2, m, f1.scalar_curvature / (m - 1), f2.scalar_curvature / (m - 1))


def _affine(model: ProductModel, e1: SpectrumEntry, e2: SpectrumEntry) -> AffineEigenvalue:
    return AffineEigenvalue(
        e1.label,
        e2.label,
        e1.eigenvalue - model.c1,
        e2.eigenvalue - model.c2,
        e1.multiplicity * e2.multiplicity,
    )


def build_affine(model: ProductModel, i: int, j: int) -> AffineEigenvalue:
    if (i, j) == (0, 0):
        raise ValueError("(0, 0) is the constant direction, excluded from the domain of J_s")
    return _affine(model, model.factor1.entry(i), model.factor2.entry(j))


def _require(factor: FactorSpectrum, which: str, cap: Fraction):
    if cap > factor.truncation_bound:
        raise TruncationError(f"{which} ({factor.name})", cap, factor.truncation_bound)


def is_pair_degenerate(model: ProductModel) -> PairDegeneracy:
    """Both c1 and c2 lie in their factor spectra, so sigma_{i*,j*} == 0 for all s."""
    _require(model.factor1, "factor1", model.c1)
    _require(model.factor2, "factor2", model.c2)
    i_star = model.factor1.index_of(model.c1)
    j_star = model.factor2.index_of(model.c2)
    if i_star is not None and j_star is not None:
        return PairDegeneracy(True, (i_star, j_star))
    return PairDegeneracy(False, None)


def zero_of(branch: AffineEigenvalue) -> Optional[Fraction]:
    if branch.A == 0 and branch.B == 0:
        raise DegeneratePairError(
            f"branch ({branch.i},{branch.j}) vanishes identically: degenerate pair"
        )
    if branch.A * branch.B < 0:
        return -branch.B / branch.A
    return None


def _check_window(window) -> tuple[Fraction, Fraction]:
    lo, hi = (Fraction(w) for w in window)
    if not (0 < lo < hi):
        raise ValueError(f"window must satisfy 0 < s_lo < s_hi, got [{lo}, {hi}]")
    return lo, hi


def _reject_degenerate(model):
    verdict = is_pair_degenerate(model)
    if verdict.degenerate:
        raise DegeneratePairError(
            f"degenerate pair of metrics: c1={model.c1} and c2={model.c2} are both "
            f"eigenvalues (labels {verdict.witness}); J_s is singular for every s"
        )


def _increasing_branches(model, s_lo):
    """Branches with A > 0 > B whose zero can be >= s_lo."""
    if model.c2 <= 0:
        return []
    cap1 = model.c1 + model.c2 / s_lo
    _require(model.factor2, "factor2", model.c2)
    _require(model.factor1, "factor1", cap1)
    low2 = [e for e in model.factor2.entries if e.eigenvalue < model.c2]
    high1 = [e for e in model.factor1.entries_up_to(cap1) if e.eigenvalue > model.c1]
    return [_affine(model, e1, e2) for e2 in low2 for e1 in high1]


def _decreasing_branches(model, s_hi):
    """Branches with A < 0 < B whose zero can be <= s_hi."""
    if model.c1 <= 0:
        return []
    cap2 = model.c2 + model.c1 * s_hi
    _require(model.factor1, "factor1", model.c1)
    _require(model.factor2, "factor2", cap2)
    low1 = [e for e in model.factor1.entries if e.eigenvalue < model.c1]
    high2 = [e for e in model.factor2.entries_up_to(cap2) if e.eigenvalue > model.c2]
    return [_affine(model, e1, e2) for e1 in low1 for e2 in high2]


def _group(branches, lo, hi) -> list[DegeneracyInstant]:
    groups = defaultdict(list)
    for b in branches:
        s = -b.B / b.A
        if lo <= s <= hi:
            groups[s].append(b)
    return [
        DegeneracyInstant(s, tuple(sorted(groups[s], key=lambda b: (b.i, b.j))))
        for s in sorted(groups)
    ]


def degeneracy_instants(model: ProductModel, window: Sequence) -> list[DegeneracyInstant]:
    """Every s* in the closed window where J_s has a kernel, with its vanishing group.

    The label ranges scanned are provably sufficient; if a factor is not
    listed far enough to cover them a :class:`TruncationError` is raised
    instead of returning a possibly incomplete list.
    """
    lo, hi = _check_window(window)
    _reject_degenerate(model)
    branches = _increasing_branches(model, lo) + _decreasing_branches(model, hi)
    return _group(branches, lo, hi)


def instant_sequences(model: ProductModel, count: int) -> tuple[list[Fraction], list[Fraction]]:
    """First ``count`` zeros of the increasing branches (descending, accumulating at 0)
    and of the decreasing branches (ascending, accumulating at infinity)."""
    if count < 1:
        raise ValueError("count must be positive")
    _reject_degenerate(model)
    f1, f2, c1, c2 = model.factor1, model.factor2, model.c1, model.c2

    toward_zero: list[Fraction] = []
    if c2 > 0:
        _require(f2, "factor2", c2)
        zeros = sorted(
            {(c2 - e2.eigenvalue) / (e1.eigenvalue - c1)
             for e2 in f2.entries if e2.eigenvalue < c2
             for e1 in f1.entries if e1.eigenvalue > c1},
            reverse=True,
        )
        # unlisted rho1 > bound give zeros strictly below c2 / (bound - c1)
        floor = c2 / (f1.truncation_bound - c1) if f1.truncation_bound > c1 else None
        if len(zeros) < count or floor is None or zeros[count - 1] < floor:
            raise TruncationError(
                "factor1 (%s)" % f1.name, f"more eigenvalues for {count} terms", f1.truncation_bound
            )
        toward_zero = zeros[:count]

    toward_infinity: list[Fraction] = []
    if c1 > 0:
        _require(f1, "factor1", c1)
        zeros = sorted(
            {(e2.eigenvalue - c2) / (c1 - e1.eigenvalue)
             for e1 in f1.entries if e1.eigenvalue < c1
             for e2 in f2.entries if e2.eigenvalue > c2}
        )
        # unlisted rho2 > bound give zeros strictly above (bound - c2) / c1
        ceiling = (f2.truncation_bound - c2) / c1
        if len(zeros) < count or zeros[count - 1] > ceiling:
            raise TruncationError(
                "factor2 (%s)" % f2.name, f"more eigenvalues for {count} terms", f2.truncation_bound
            )
        toward_infinity = zeros[:count]

    return toward_zero, toward_infinity


# -- shipped fixtures --------------------------------------------------------


def sphere_hemisphere_model(k_max: int = 6) -> ProductModel:
    """S^2 x (upper hemisphere of S^2), m = 4, c1 = c2 = 2/3."""
    from .spectra import hemisphere_neumann_spectrum, sphere_spectrum

    return build_model(sphere_spectrum(2, k_max), hemisphere_neumann_spectrum(k_max))


def neutral_fixture(harmonically_free: Optional[bool] = False, truncation_bound=100) -> ProductModel:
    """Minimal model with a neutral instant at s* = 1.

    Both factors have spectrum (0, 2) with multiplicities (1, 1) and R = 3,
    so with m = 4 we get c1 = c2 = 1 and the branches (1,0) and (0,1)
    vanish together at s = 1 with equal multiplicity.  The spectra are
    declared complete up to ``truncation_bound``.
    """
    f1 = synthetic_spectrum(
        "neutral-closed", [0, 2], [1, 1], dimension=2, scalar_curvature=3,
        boundary=Boundary.CLOSED, truncation_bound=truncation_bound,
        harmonically_free=harmonically_free,
    )
    f2 = synthetic_spectrum(
        "neutral-neumann", [0, 2], [1, 1], dimension=2, scalar_curvature=3,
        boundary=Boundary.NEUMANN, truncation_bound=truncation_bound,
    )
    return build_model(f1, f2)
