from fractions import Fraction as F

import numpy as np
import pytest
import scipy.linalg

from yamabe_spectra import witness as w
from yamabe_spectra.witness import Grid1D, Topology

P, N = Topology.PERIODIC, Topology.NEUMANN_INTERVAL


def spectrum(op):
    return np.sort(scipy.linalg.eigvalsh(op.dense()))


def test_constant_in_kernel():
    for grid in (Grid1D(9, P), Grid1D(9, N), Grid1D(50, N)):
        op = w.assemble_laplacian(grid)
        assert np.max(np.abs(op.apply(np.ones(grid.points)))) < 1e-12
    js = w.assemble_product_Js(Grid1D(8, P), Grid1D(7, N), 1.0, 0.0)
    assert np.max(np.abs(js.apply(np.ones(56)))) < 1e-12


def test_grid_validation():
    with pytest.raises(ValueError):
        w.assemble_laplacian(Grid1D(3, P))


def test_symmetry():
    for op in (w.assemble_laplacian(Grid1D(12, N)), w.assemble_product_Js(Grid1D(10, P), Grid1D(11, N), 0.37, 0.9)):
        d = op.dense()
        assert np.array_equal(d, d.T)
        assert op.symmetric


def test_discrete_eigenvalues_match_formula():
    for grid in (Grid1D(16, P), Grid1D(16, N), Grid1D(33, N)):
        exact = np.sort([grid.exact_eigenvalue(k) for k in range(grid.points)])
        if grid.topology is P:
            # k and N - k share a cosine
            exact = np.sort([grid.exact_eigenvalue(min(k, grid.points - k)) for k in range(grid.points)])
        assert np.allclose(spectrum(w.assemble_laplacian(grid)), exact, atol=1e-10)


def test_neumann_k1_and_refinement():
    errors = []
    for n in (32, 64, 128):
        vals = spectrum(w.assemble_laplacian(Grid1D(n, N)))
        nearest = vals[np.argmin(np.abs(vals - 1))]
        errors.append(abs(nearest - 1))
    assert errors[-1] < 1e-3
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 < coarse / fine < 4.5


def test_periodic_first_mode():
    vals = spectrum(w.assemble_laplacian(Grid1D(64, P)))
    assert np.sum(np.abs(vals) < 1e-10) == 1
    assert abs(vals[1] - 1) < 1e-3 and abs(vals[2] - vals[1]) < 1e-12


def test_kronecker_sum_identity():
    g1, g2 = Grid1D(16, P), Grid1D(16, N)
    l1, l2 = spectrum(w.assemble_laplacian(g1)), spectrum(w.assemble_laplacian(g2))
    for s, c in [(1.0, 0.0), (0.4, 0.75), (3.0, -1.2)]:
        pairs = np.sort((l1[:, None] + l2[None, :] / s - c).ravel())
        assert np.max(np.abs(spectrum(w.assemble_product_Js(g1, g2, s, c)) - pairs)) < 1e-9


def test_shift_identity():
    g1, g2 = Grid1D(10, P), Grid1D(12, N)
    base = spectrum(w.assemble_product_Js(g1, g2, 0.8, 0.0))
    shifted = spectrum(w.assemble_product_Js(g1, g2, 0.8, 0.3))
    assert np.max(np.abs(shifted - (base - 0.3))) < 1e-12


@pytest.mark.parametrize("n1,n2", [(12, 13), (40, 41)])  # dense and sparse paths
def test_inertia_count_matches_dense(n1, n2):
    g1, g2 = Grid1D(n1, P), Grid1D(n2, N)
    for s, c in [(0.5, 0.6), (1.7, 2.3), (2.0, 0.0)]:
        op = w.assemble_product_Js(g1, g2, s, c)
        vals = w.deflated_eigenpairs(op)
        assert w.negative_count(op) == int(np.sum(vals < 0))


def test_nearest_zero_matches_dense():
    g1, g2 = Grid1D(30, P), Grid1D(31, N)  # 930 > dense limit
    op = w.assemble_product_Js(g1, g2, 1.3, 0.8)
    vals = w.deflated_eigenpairs(op)
    expect = np.sort(vals[np.argsort(np.abs(vals))[:2]])
    assert np.allclose(w.nearest_zero_eigenpairs(op, 2), expect, atol=1e-9)


def test_crossing_at_two():
    crossings = [
        w.crossing_scan(Grid1D(n, P), Grid1D(n + k, N), 0.5, 0.0, (1.0, 4.0), 31,
                        analytic=w.analytic_instants(F(1, 2), F(0), (F(1), F(4))))
        for n, k in [(64, 1), (128, 2)]
    ]
    near = [min(cs, key=lambda c: abs(c.s_estimate - 2)) for cs in crossings]
    for c in near:
        assert c.analytic == 2 and abs(c.s_estimate - 2) / 2 < 1e-2
        assert c.bracket[1] - c.bracket[0] <= 1e-6 * c.s_estimate
    assert near[1].deviation < near[0].deviation


def test_neutral_crossing():
    found = w.crossing_scan(Grid1D(64, P), Grid1D(65, N), 0.5, 0.5, (0.5, 2.0), 31,
                            analytic=w.analytic_instants(F(1, 2), F(1, 2), (F(1, 2), F(2))))
    assert found and all(abs(c.s_estimate - 1) < 1e-2 for c in found)
    assert all(c.analytic == 1 and c.deviation is not None for c in found)


def test_no_crossings_without_shift():
    assert w.crossing_scan(Grid1D(16, P), Grid1D(17, N), 0.0, 0.0, (0.2, 5.0), 15) == []


def test_touch_detection():
    # (1,0) leaves and (0,1) enters at s = 1 exactly; the count never changes
    g = Grid1D(40, N)
    lam = g.exact_eigenvalue(1)
    found = w.crossing_scan(g, g, lam / 2, lam / 2, (0.5, 2.0), 21)
    assert len(found) == 1
    (c,) = found
    assert c.kind == "touch" and abs(c.s_estimate - 1) < 1e-5


def test_residual_identities():
    g1, g2 = Grid1D(16, P), Grid1D(17, N)
    op = w.assemble_product_Js(g1, g2, 1.5, 0.0)
    params = w.YamabeParams(4, 2.0, 2.0)
    ones = np.ones(op.dimension)
    assert w.yamabe_residual(ones, params, op) <= 1e-12
    delta = 1e-3
    volume = op.weights.sum()
    got = w.yamabe_residual(ones, w.YamabeParams(4, 2.0, 2.0 - delta), op)
    assert abs(got - delta * np.sqrt(volume)) < 1e-10
    with pytest.raises(ValueError):
        w.yamabe_residual(-ones, params, op)


def test_residual_linearization():
    g1, g2 = Grid1D(32, P), Grid1D(33, N)
    op = w.assemble_product_Js(g1, g2, 1.0, 0.0)
    params = w.YamabeParams(4, 3.0, 3.0)
    ones = np.ones(op.dimension)
    phi = np.kron(np.cos(g1.nodes), np.ones(g2.points))  # discrete eigenfunction
    lam = g1.exact_eigenvalue(1)
    assert np.allclose(op.apply(phi), lam * phi)
    base = w.yamabe_residual_vector(ones, params, op)
    jac = w.yamabe_linearization(ones, params, op)
    linear = abs(params.coefficient * lam + params.R - params.K * params.exponent) * op.norm(phi)
    ratios = []
    prev = None
    for eps in (1e-2, 5e-3, 2.5e-3):
        u = ones + eps * phi
        assert abs(w.yamabe_residual(u, params, op) - eps * linear) < 10 * eps**2 * op.norm(phi)
        rem = op.norm(w.yamabe_residual_vector(u, params, op) - base - eps * (jac @ phi))
        if prev is not None:
            ratios.append(prev / rem)
        prev = rem
    assert all(3.5 <= r <= 4.5 for r in ratios)


def test_newton_constant_start():
    fam = w.WitnessFamily(Grid1D(16, P), Grid1D(17, N), 0.5, 0.5)
    for s in (0.7, 1.0, 2.5):
        r = w.newton_branch_probe(fam, s, epsilon=0.0)
        assert r.converged and r.non_constancy < 1e-10 and r.label == "no branch found"
        assert r.iterations == 0


def test_newton_near_neutral_crossing():
    fam = w.WitnessFamily(Grid1D(64, P), Grid1D(65, N), 0.5, 0.5)
    runs = [w.newton_branch_probe(fam, 0.99961, epsilon=1e-2) for _ in range(2)]
    assert runs[0].converged and runs[0].residual < 1e-8
    assert runs[0].label in {"nontrivial solution witnessed", "no branch found"}
    assert runs[0] == runs[1] and runs[0].history == runs[1].history
