"""Representation signatures at a degeneracy instant and instant classification.

A group acting isometrically on the closed factor (trivially on the
boundary factor) acts on V1_i (x) V2_j as dim(V2_j) copies of its action on
V1_i.  The part of the negative eigenspace that is negative on both sides
of s* cancels, so only the vanishing branches are compared: increasing ones
(present just below s*) against decreasing ones (present just above).
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvariantViolation
from .morse import index_jump
from .product import DegeneracyInstant, ProductModel
from .spectra import Boundary, FactorSpectrum

__all__ = [
    "SignatureTerm",
    "RepresentationSignature",
    "InstantKind",
    "InstantClassification",
    "HFCheck",
    "signatures_at",
    "classify",
    "hf_necessary_check",
]


@dataclass(frozen=True, order=True)
class SignatureTerm:
    label: int  # closed-factor eigenspace, standing in for its representation
    coefficient: int
    dimension: int  # dim of that closed-factor eigenspace


@dataclass(frozen=True)
class RepresentationSignature:
    terms: tuple[SignatureTerm, ...] = ()

    def __post_init__(self):
        labels = [t.label for t in self.terms]
        if len(set(labels)) != len(labels):
            raise InvariantViolation(f"repeated closed-factor label in signature {labels}")
        if any(t.coefficient < 1 for t in self.terms):
            raise InvariantViolation("signature coefficients must be positive")
        object.__setattr__(self, "terms", tuple(sorted(self.terms)))

    @property
    def total_dimension(self) -> int:
        return sum(t.coefficient * t.dimension for t in self.terms)

    def as_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((t.label, t.coefficient) for t in self.terms)

    def __bool__(self):
        return bool(self.terms)


class InstantKind(enum.Enum):
    INDEX_JUMP = "IndexJumpBifurcation"
    EQUIVARIANT = "EquivariantBifurcation"
    NEUTRAL_UNDECIDED = "NeutralUndecided"


@dataclass(frozen=True)
class InstantClassification:
    kind: InstantKind
    jump: int
    incoming: RepresentationSignature
    outgoing: RepresentationSignature
    signatures_equal: bool

    def __post_init__(self):
        if self.kind is InstantKind.INDEX_JUMP and self.jump == 0:
            raise InvariantViolation("an index-jump classification needs a nonzero jump")


def _signature(model: ProductModel, branches) -> RepresentationSignature:
    f1, f2 = model.factor1, model.factor2
    coeff = Counter()
    for b in branches:
        coeff[b.i] += f2.entry(b.j).multiplicity
    return RepresentationSignature(
        tuple(SignatureTerm(i, n, f1.entry(i).multiplicity) for i, n in coeff.items())
    )


def signatures_at(model: ProductModel, instant: DegeneracyInstant):
    """(incoming, outgoing) signatures of the branches vanishing at ``instant``."""
    i_labels = [b.i for b in instant.vanishing]
    j_labels = [b.j for b in instant.vanishing]
    if len(set(i_labels)) != len(i_labels) or len(set(j_labels)) != len(j_labels):
        raise InvariantViolation(f"vanishing branches at {instant.s_star} are not label-distinct")
    incoming = _signature(model, [b for b in instant.vanishing if b.B < 0])
    outgoing = _signature(model, [b for b in instant.vanishing if b.B > 0])
    return incoming, outgoing


def classify(
    model: ProductModel, instant: DegeneracyInstant, window: Optional[Sequence] = None
) -> InstantClassification:
    jump = index_jump(model, instant, window)
    incoming, outgoing = signatures_at(model, instant)
    if outgoing.total_dimension - incoming.total_dimension != jump:
        raise InvariantViolation(f"signature dimensions disagree with the index jump at {instant.s_star}")
    equal = Counter(incoming.as_pairs()) == Counter(outgoing.as_pairs())
    if jump != 0:
        kind = InstantKind.INDEX_JUMP
    elif model.factor1.harmonically_free is True:
        # distinct eigenspaces with positive coefficients on each side; under a
        # harmonically free action the two sums are never equivalent
        kind = InstantKind.EQUIVARIANT
    else:
        kind = InstantKind.NEUTRAL_UNDECIDED
    return InstantClassification(kind, jump, incoming, outgoing, equal)


@dataclass(frozen=True)
class HFCheck:
    passed: bool
    repeated_multiplicities: tuple[int, ...]


def hf_necessary_check(spectrum: FactorSpectrum) -> HFCheck:
    """Dimensional necessary condition for pairwise inequivalent eigenspaces.

    Equal dimensions do not prove equivalence, and distinct ones do not
    prove harmonic freeness; the flag on the spectrum is never touched.
    """
    if spectrum.boundary is not Boundary.CLOSED:
        raise ValueError("harmonic freeness concerns the closed factor")
    counts = Counter(spectrum.multiplicities)
    repeated = tuple(sorted(mu for mu, n in counts.items() if n > 1))
    return HFCheck(not repeated, repeated)
