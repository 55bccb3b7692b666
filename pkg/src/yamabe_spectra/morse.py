"""Morse index of J_s and its staircase over a window of s."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InstantError, InvariantViolation
from .product import (
    DegeneracyInstant,
    ProductModel,
    _affine,
    _check_window,
    _require,
    degeneracy_instants,
)

__all__ = ["MorseProfile", "morse_index", "index_jump", "signed_vanishing_multiplicity", "morse_profile"]


@dataclass(frozen=True)
class MorseProfile:
    window: tuple[Fraction, Fraction]
    breakpoints: tuple[Fraction, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise InvariantViolation("a profile needs one value per interval")

    def intervals(self) -> list[tuple[Fraction, Fraction, int]]:
        edges = [self.window[0], *self.breakpoints, self.window[1]]
        return [(edges[k], edges[k + 1], v) for k, v in enumerate(self.values)]

    def value_at(self, s) -> int:
        s = Fraction(s)
        if s in self.breakpoints:
            raise InstantError(f"Morse index undefined at the degeneracy instant {s}")
        return self.values[bisect.bisect_left(self.breakpoints, s)]


def _negative_candidates(model: ProductModel, s: Fraction):
    """Labels (i, j) that can possibly have sigma_ij(s) <= 0."""
    f1, f2, c1, c2 = model.factor1, model.factor2, model.c1, model.c2
    pairs = set()
    if c2 > 0:
        cap1 = c1 + c2 / s
        _require(f2, "factor2", c2)
        _require(f1, "factor1", cap1)
        for e2 in f2.entries:
            if e2.eigenvalue < c2:
                pairs.update((e1.label, e2.label) for e1 in f1.entries_up_to(cap1))
    if c1 > 0:
        cap2 = c2 + c1 * s
        _require(f1, "factor1", c1)
        _require(f2, "factor2", cap2)
        for e1 in f1.entries:
            if e1.eigenvalue < c1:
                pairs.update((e1.label, e2.label) for e2 in f2.entries_up_to(cap2))
    pairs.discard((0, 0))
    return sorted(pairs)


def morse_index(model: ProductModel, s) -> int:
    """Total multiplicity of the negative eigenvalues of J_s.

    Raises :class:`InstantError` if ``s`` is itself a degeneracy instant.
    """
    s = Fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    total = 0
    for i, j in _negative_candidates(model, s):
        branch = _affine(model, model.factor1.entry(i), model.factor2.entry(j))
        sigma = branch.value(s)
        if sigma == 0:
            raise InstantError(f"s = {s} is a degeneracy instant (branch ({i},{j}) vanishes)")
        if sigma < 0:
            total += branch.multiplicity
    return total


def signed_vanishing_multiplicity(instant: DegeneracyInstant) -> int:
    """Multiplicity entering V^- (decreasing branches) minus multiplicity leaving it."""
    return sum(b.multiplicity for b in instant.vanishing if b.B > 0) - sum(
        b.multiplicity for b in instant.vanishing if b.B < 0
    )


def _neighbours(model, s, window):
    if window is None:
        lo, hi = s / 2, 2 * s
    else:
        lo, hi = _check_window(window)
    found = [d.s_star for d in degeneracy_instants(model, (lo, hi))]
    if s not in found:
        raise ValueError(f"{s} is not a degeneracy instant of this model within [{lo}, {hi}]")
    k = found.index(s)
    below = found[k - 1] if k > 0 else lo
    above = found[k + 1] if k + 1 < len(found) else hi
    return below, above


def index_jump(model: ProductModel, instant: DegeneracyInstant, window: Optional[Sequence] = None) -> int:
    """Change of the Morse index across ``instant``, going from s* - eps to s* + eps.

    Computed twice, by sampling the index at the midpoints to the adjacent
    instants and from the signed multiplicity of the vanishing group; the
    two must agree exactly.
    """
    s = instant.s_star
    below, above = _neighbours(model, s, window)
    if below == s or above == s:
        # instant sits on a window edge: look just past it
        below, above = _neighbours(model, s, None)
    sampled = morse_index(model, (s + above) / 2) - morse_index(model, (below + s) / 2)
    signed = signed_vanishing_multiplicity(instant)
    if sampled != signed:
        raise InvariantViolation(
            f"index jump at s*={s}: sampling gives {sampled}, vanishing group gives {signed}"
        )
    return sampled


def morse_profile(model: ProductModel, window: Sequence) -> MorseProfile:
    lo, hi = _check_window(window)
    instants = degeneracy_instants(model, (lo, hi))
    breakpoints = [d.s_star for d in instants]
    edges = [lo, *breakpoints, hi]
    values: list[Optional[int]] = []
    for a, b in zip(edges, edges[1:]):
        if a == b:
            values.append(None)
            continue
        first = morse_index(model, a + (b - a) / 3)
        second = morse_index(model, a + 2 * (b - a) / 3)
        if first != second:
            raise InvariantViolation(f"Morse index not constant on ({a}, {b})")
        values.append(first)

    jumps = [signed_vanishing_multiplicity(d) for d in instants]
    # an edge interval collapses when an instant sits exactly on the window edge
    if values[0] is None:
        values[0] = values[1] - jumps[0]
    if values[-1] is None:
        values[-1] = values[-2] + jumps[-1]
    for k, jump in enumerate(jumps):
        if values[k + 1] - values[k] != jump:
            raise InvariantViolation(f"profile step at {breakpoints[k]} disagrees with its jump {jump}")
    return MorseProfile((lo, hi), tuple(breakpoints), tuple(values))
