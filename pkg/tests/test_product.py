from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from yamabe_spectra.errors import DegeneratePairError, InvariantViolation, ModelError, TruncationError
from yamabe_spectra.product import (
    AffineEigenvalue,
    DegeneracyInstant,
    build_affine,
    build_model,
    degeneracy_instants,
    instant_sequences,
    is_pair_degenerate,
    neutral_fixture,
    sphere_hemisphere_model,
    zero_of,
)
from yamabe_spectra.spectra import (
    Boundary,
    hemisphere_neumann_spectrum,
    interval_neumann_spectrum,
    sphere_spectrum,
    synthetic_spectrum,
)

SH_INSTANTS = [F(1, 17), F(1, 8), F(1, 2), F(2), F(8), F(17)]


def brute_force(model, lo, hi):
    """Every -B/A in [lo, hi] over all listed label pairs."""
    out = set()
    for e1 in model.factor1.entries:
        for e2 in model.factor2.entries:
            if (e1.label, e2.label) == (0, 0):
                continue
            A, B = e1.eigenvalue - model.c1, e2.eigenvalue - model.c2
            if A * B < 0 and lo <= -B / A <= hi:
                out.add(-B / A)
    return sorted(out)


def test_build_model_constants():
    model = sphere_hemisphere_model()
    assert (model.m, model.c1, model.c2) == (4, F(2, 3), F(2, 3))
    s3 = build_model(sphere_spectrum(3, 4), hemisphere_neumann_spectrum(4))
    assert (s3.m, s3.c1, s3.c2) == (5, F(3, 2), F(1, 2))


def test_build_model_rejects():
    with pytest.raises(ModelError, match="m ≥ 3 required"):
        build_model(sphere_spectrum(1, 3), interval_neumann_spectrum(3))
    with pytest.raises(ModelError):
        build_model(hemisphere_neumann_spectrum(3), sphere_spectrum(2, 3))


def test_build_affine(sh_model):
    b = build_affine(sh_model, 1, 0)
    assert (b.A, b.B, b.multiplicity) == (F(4, 3), F(-2, 3), 3)
    b = build_affine(sh_model, 0, 1)
    assert (b.A, b.B, b.multiplicity) == (F(-2, 3), F(4, 3), 2)
    with pytest.raises(ValueError):
        build_affine(sh_model, 0, 0)


def test_affine_matches_formula(sh_model):
    for i in range(4):
        for j in range(4):
            if (i, j) == (0, 0):
                continue
            b = build_affine(sh_model, i, j)
            for s in (F(1, 7), F(1), F(13, 5)):
                rho1 = i * (i + 1)
                rho2 = j * (j + 1)
                assert b.value(s) == (rho1 - F(2, 3)) + (rho2 - F(2, 3)) / s


def test_zero_of():
    assert zero_of(AffineEigenvalue(1, 0, F(4, 3), F(-2, 3), 1)) == F(1, 2)
    assert zero_of(AffineEigenvalue(0, 1, F(-2, 3), F(4, 3), 1)) == 2
    assert zero_of(AffineEigenvalue(1, 1, F(4, 3), F(4, 3), 1)) is None
    with pytest.raises(DegeneratePairError):
        zero_of(AffineEigenvalue(1, 1, F(0), F(0), 1))


def test_pair_degeneracy(sh_model):
    assert not is_pair_degenerate(sh_model)
    flat = synthetic_spectrum("T2", [0, 1, 2], [1, 4, 4], dimension=2, scalar_curvature=0,
                              boundary=Boundary.CLOSED)
    verdict = is_pair_degenerate(build_model(flat, interval_neumann_spectrum(4)))
    assert verdict.degenerate and verdict.witness == (0, 0)
    # synthetic lists that contain exactly c1 and c2
    f1 = synthetic_spectrum("a", [0, 1], [1, 1], dimension=2, scalar_curvature=3, boundary=Boundary.CLOSED)
    f2 = synthetic_spectrum("b", [0, 2, 5], [1, 1, 1], dimension=2, scalar_curvature=6, boundary=Boundary.NEUMANN)
    model = build_model(f1, f2)
    assert is_pair_degenerate(model).witness == (1, 1)
    with pytest.raises(DegeneratePairError):
        degeneracy_instants(model, (F(1), F(2)))


def test_sphere_hemisphere_instants(sh_model):
    instants = degeneracy_instants(sh_model, (F(1, 20), F(20)))
    assert [d.s_star for d in instants] == SH_INSTANTS
    by_s = {d.s_star: d for d in instants}
    assert [(b.i, b.j) for b in by_s[F(1, 2)].vanishing] == [(1, 0)]
    assert [(b.i, b.j) for b in by_s[F(2)].vanishing] == [(0, 1)]
    (b8,) = by_s[F(8)].vanishing
    assert (b8.i, b8.j, b8.A, b8.B) == (0, 2, F(-2, 3), F(16, 3))
    assert degeneracy_instants(sh_model, (F(3), F(7))) == []


def test_completeness_oracle(sh_model):
    window = (F(1, 20), F(20))
    found = [d.s_star for d in degeneracy_instants(sh_model, window)]
    bigger = sphere_hemisphere_model(12)
    assert [d.s_star for d in degeneracy_instants(bigger, window)] == found
    assert brute_force(sphere_hemisphere_model(24), *window) == found


def test_truncation_is_certified():
    short = build_model(sphere_spectrum(2, 2), hemisphere_neumann_spectrum(2))
    with pytest.raises(TruncationError) as info:
        degeneracy_instants(short, (F(1, 20), F(20)))
    assert info.value.required > info.value.available


def test_neutral_instant():
    model = neutral_fixture()
    (inst,) = degeneracy_instants(model, (F(1, 2), F(2)))
    assert inst.s_star == 1
    assert [(b.i, b.j) for b in inst.vanishing] == [(0, 1), (1, 0)]


def test_instant_invariants():
    good = AffineEigenvalue(1, 0, F(4, 3), F(-2, 3), 3)
    with pytest.raises(InvariantViolation):
        DegeneracyInstant(F(1), (good,))
    twin = AffineEigenvalue(1, 2, F(4, 3), F(-2, 3), 1)  # shares i = 1
    with pytest.raises(InvariantViolation):
        DegeneracyInstant(F(1, 2), (good, twin))


def test_sequences(sh_model):
    zero, inf = instant_sequences(sh_model, 3)
    assert zero == [F(1, 2), F(1, 8), F(1, 17)]
    assert inf == [F(2), F(8), F(17)]
    assert instant_sequences(sh_model, 1) == ([F(1, 2)], [F(2)])
    with pytest.raises(TruncationError):
        instant_sequences(sh_model, 40)


def test_sequences_flat_closed_factor():
    flat = synthetic_spectrum("T2", [0, 1, 2], [1, 4, 4], dimension=2, scalar_curvature=0,
                              boundary=Boundary.CLOSED, truncation_bound=50)
    model = build_model(flat, hemisphere_neumann_spectrum(8))
    zero, inf = instant_sequences(model, 1)
    assert inf == []  # no branch with A < 0 when c1 = 0
    assert len(zero) == 1


@st.composite
def models(draw):
    def spectrum(boundary, name):
        steps = draw(st.lists(st.fractions(min_value=F(1, 4), max_value=6, max_denominator=4), min_size=1, max_size=7))
        values = [F(0)]
        for d in steps:
            values.append(values[-1] + d)
        mults = draw(st.lists(st.integers(1, 5), min_size=len(values), max_size=len(values)))
        return synthetic_spectrum(name, values, mults, dimension=draw(st.integers(1, 3)),
                                  scalar_curvature=draw(st.fractions(min_value=0, max_value=12, max_denominator=3)),
                                  boundary=boundary, truncation_bound=1000)

    f1 = spectrum(Boundary.CLOSED, "f1")
    f2 = spectrum(Boundary.NEUMANN, "f2")
    assume(f1.dimension + f2.dimension >= 3)
    model = build_model(f1, f2)
    assume(not is_pair_degenerate(model))
    return model


windows = st.tuples(
    st.fractions(min_value=F(1, 10), max_value=3, max_denominator=10),
    st.fractions(min_value=F(1, 10), max_value=5, max_denominator=10),
).filter(lambda w: w[0] < w[1])


def _prefix(spec, n):
    entries = spec.entries[:n]
    return spec.replace(entries=entries, truncation_bound=entries[-1].eigenvalue)


@settings(max_examples=150, deadline=None)
@given(models(), windows, st.integers(1, 8), st.integers(1, 8))
def test_certified_answers_survive_more_eigenvalues(model, window, n1, n2):
    """Whatever a truncated model certifies is what the full model says."""
    full = degeneracy_instants(model, window)
    assert [d.s_star for d in full] == brute_force(model, *window)
    cut = model.__class__(_prefix(model.factor1, n1), _prefix(model.factor2, n2), model.m, model.c1, model.c2)
    try:
        partial = degeneracy_instants(cut, window)
    except (TruncationError, DegeneratePairError):
        return
    assert partial == full


@settings(max_examples=100, deadline=None)
@given(models(), windows, windows)
def test_window_monotonicity(model, w, v):
    lo, hi = min(w[0], v[0]), max(w[1], v[1])
    inner = [d.s_star for d in degeneracy_instants(model, w)]
    outer = [d.s_star for d in degeneracy_instants(model, (lo, hi))]
    assert set(inner) <= set(outer)
    assert inner == [s for s in outer if w[0] <= s <= w[1]]
