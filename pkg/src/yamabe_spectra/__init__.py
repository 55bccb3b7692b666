"""Exact degeneracy instants, Morse profiles and representation signatures for
J_s = Delta_{g1 + s g2} - R/(m-1) on products of a closed manifold with a
Neumann-boundary manifold, plus a finite-difference witness."""

__version__ = "0.1.0"

from .errors import (
    DegeneratePairError,
    InstantError,
    InvariantViolation,
    ModelError,
    SpectrumFormatError,
    TruncationError,
    YamabeSpectraError,
)
from .spectra import (
    Boundary,
    FactorSpectrum,
    SpectrumEntry,
    hemisphere_neumann_spectrum,
    interval_neumann_spectrum,
    load_spectrum,
    serialize_spectrum,
    sphere_spectrum,
    synthetic_spectrum,
)
from .product import (
    AffineEigenvalue,
    DegeneracyInstant,
    ProductModel,
    build_affine,
    build_model,
    degeneracy_instants,
    instant_sequences,
    is_pair_degenerate,
    neutral_fixture,
    sphere_hemisphere_model,
)
from .morse import MorseProfile, index_jump, morse_index, morse_profile
from .equivariant import InstantKind, RepresentationSignature, classify, hf_necessary_check, signatures_at
