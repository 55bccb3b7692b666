"""Floating-point witness for the exact spectral predictions.

Factor Laplacians are discretized on a circle and on a Neumann interval,
combined into the discrete J_s = L1 (x) I + (1/s) I (x) L2 - c(s) I with
synthetic shift constants c(s) = c1 + c2/s, and scanned in s for
eigenvalue crossings.  The nonlinear Yamabe equation with Neumann
boundary is checked through its discrete residual and a damped Newton
probe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "Topology",
    "Grid1D",
    "DiscreteOperator",
    "YamabeParams",
    "Crossing",
    "ProbeReport",
    "WitnessFamily",
    "assemble_laplacian",
    "assemble_product_Js",
    "deflated_eigenpairs",
    "count_below",
    "negative_count",
    "nearest_zero_eigenpairs",
    "crossing_scan",
    "analytic_instants",
    "yamabe_residual_vector",
    "yamabe_residual",
    "yamabe_linearization",
    "newton_branch_probe",
    "hemisphere_neumann_eigenvalues",
]

DENSE_LIMIT = 400


class Topology(enum.Enum):
    PERIODIC = "periodic"
    NEUMANN_INTERVAL = "neumann"


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid.

    ``PERIODIC`` covers [0, 2pi) with nodes n*h, h = 2pi/N.
    ``NEUMANN_INTERVAL`` covers [0, pi] with N cells of width h = pi/N and
    nodes at the cell centres; the boundary flux vanishes at both ends.
    """

    points: int
    topology: Topology

    @property
    def spacing(self) -> float:
        if self.topology is Topology.PERIODIC:
            return 2 * math.pi / self.points
        return math.pi / self.points

    @property
    def nodes(self) -> np.ndarray:
        h = self.spacing
        if self.topology is Topology.PERIODIC:
            return h * np.arange(self.points)
        return h * (np.arange(self.points) + 0.5)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.points, self.spacing)

    def exact_eigenvalue(self, k: int) -> float:
        """Eigenvalue 4/h^2 sin^2(kh/2) of the 3-point stencil on this grid."""
        h = self.spacing
        return 4.0 / h**2 * math.sin(k * h / 2) ** 2


@dataclass(frozen=True)
class DiscreteOperator:
    matrix: sp.csr_matrix
    weights: np.ndarray  # quadrature weights for the discrete L2 norm
    symmetric: bool = True

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def norm(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(np.sum(self.weights * x * x)))


def assemble_laplacian(grid: Grid1D) -> DiscreteOperator:
    """Positive semidefinite 3-point Laplacian -d^2/dx^2 on ``grid``."""
    n = grid.points
    if n < 4:
        raise ValueError(f"need at least 4 grid points, got {n}")
    inv_h2 = 1.0 / grid.spacing**2
    main = np.full(n, 2.0 * inv_h2)
    off = np.full(n - 1, -inv_h2)
    if grid.topology is Topology.PERIODIC:
        mat = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
        mat[0, n - 1] = -inv_h2
        mat[n - 1, 0] = -inv_h2
    else:
        # ghost value equal to the boundary cell: zero flux through the end faces
        main[0] = main[-1] = inv_h2
        mat = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
    return DiscreteOperator(mat.tocsr(), grid.weights)


def assemble_product_Js(g1: Grid1D, g2: Grid1D, s: float, c: float) -> DiscreteOperator:
    """Discrete L1 (x) I + (1/s) I (x) L2 - c I on the tensor grid."""
    if s <= 0:
        raise ValueError("s must be positive")
    l1 = assemble_laplacian(g1).matrix
    l2 = assemble_laplacian(g2).matrix
    i1 = sp.identity(g1.points, format="csr")
    i2 = sp.identity(g2.points, format="csr")
    mat = sp.kron(l1, i2, format="csr") + (1.0 / s) * sp.kron(i1, l2, format="csr")
    if c != 0:
        mat = mat - c * sp.identity(g1.points * g2.points, format="csr")
    return DiscreteOperator(mat.tocsr(), np.kron(g1.weights, g2.weights))


def _constant_unit(n: int) -> np.ndarray:
    return np.full(n, 1.0 / math.sqrt(n))


def deflated_eigenpairs(op: DiscreteOperator, k: Optional[int] = None, vectors: bool = False):
    """Smallest eigenvalues of ``op`` off the constant direction, by dense eigh.

    ``op`` must map constants to constants (true for every J_s built here);
    that direction is lifted above the whole spectrum by a rank-one term.
    """
    n = op.dimension
    k = n - 1 if k is None else min(k, n - 1)
    u = _constant_unit(n)
    shift_c = float(u @ op.apply(u))
    bound = float(abs(op.matrix).sum(axis=1).max())  # Gershgorin
    dense = op.dense() + (2.0 * bound + 1.0 - shift_c) * np.outer(u, u)
    if vectors:
        return scipy.linalg.eigh(dense, subset_by_index=(0, k - 1))
    return scipy.linalg.eigh(dense, eigvals_only=True, subset_by_index=(0, k - 1))


@dataclass(frozen=True)
class Crossing:
    s_estimate: float
    bracket: tuple[float, float]
    kind: str  # "sign_change" or "touch"
    analytic: Optional[Fraction] = None
    deviation: Optional[float] = None  # relative distance to ``analytic``


def _js_family(g1, g2, c1, c2):
    def js(s):
        return assemble_product_Js(g1, g2, s, float(c1) + float(c2) / s)

    return js


def count_below(op: DiscreteOperator, t: float = 0.0) -> int:
    """Number of eigenvalues of ``op`` below ``t``, by Sylvester's law of inertia.

    Uses a symmetric-mode sparse LU (no off-diagonal pivoting), so the signs
    of the pivots of op - tI are the signs of its eigenvalues.
    """
    n = op.dimension
    shifted = (op.matrix - t * sp.identity(n, format="csr")).tocsc()
    try:
        lu = spla.splu(
            shifted, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
            options=dict(SymmetricMode=True),
        )
    except RuntimeError:
        lu = None
    if lu is None or not np.array_equal(lu.perm_r, lu.perm_c):
        if n > 4 * DENSE_LIMIT:
            raise RuntimeError("symmetric factorization failed; cannot count eigenvalues")
        return int(np.sum(np.linalg.eigvalsh(shifted.toarray()) < 0))
    return int(np.sum(lu.U.diagonal() < 0))


def negative_count(op: DiscreteOperator) -> int:
    """Negative eigenvalues of ``op`` restricted to mean-zero vectors."""
    u = _constant_unit(op.dimension)
    shift_c = float(u @ op.apply(u))
    # constant direction is an exact invariant line; step off an exact zero
    t = 0.0 if abs(shift_c) > 1e-12 else -1e-9
    return count_below(op, t) - (1 if shift_c < t else 0)


def nearest_zero_eigenpairs(op: DiscreteOperator, k: int = 1, vectors: bool = False):
    """Eigenvalues of ``op`` off the constant direction closest to zero."""
    n = op.dimension
    u = _constant_unit(n)
    shift_c = float(u @ op.apply(u))
    bound = float(abs(op.matrix).sum(axis=1).max())
    lift = 2.0 * bound + 1.0  # constant direction moved to +lift
    if n <= DENSE_LIMIT:
        w, v = scipy.linalg.eigh(op.dense() + (lift - shift_c) * np.outer(u, u))
        order = np.argsort(np.abs(w))[:k]
        order = order[np.argsort(w[order])]
        return (w[order], v[:, order]) if vectors else w[order]

    sigma = 0.0
    lu = None
    for _ in range(3):
        try:
            lu = spla.splu((op.matrix - sigma * sp.identity(n, format="csr")).tocsc())
            break
        except RuntimeError:
            sigma -= 1e-8 * (1.0 + bound)  # exactly singular: nudge the shift
    inverse = spla.LinearOperator((n, n), matvec=lambda x: lu.solve(np.asarray(x).ravel()), dtype=float)
    v0 = np.cos(np.arange(n) * 0.7318 + 0.1)  # fixed start vector keeps runs reproducible
    w, v = spla.eigsh(op.matrix, k=k + 1, sigma=sigma, OPinv=inverse, which="LM", v0=v0)
    # u is an exact eigenvector; drop one copy of its eigenvalue, else the farthest pair
    overlap = np.abs(u @ v)
    candidates = np.flatnonzero(np.abs(w - shift_c) <= 1e-9 * (1.0 + bound))
    if candidates.size:
        drop = candidates[np.argmax(overlap[candidates])]
    else:
        drop = int(np.argmax(np.abs(w)))
    keep = np.array([i for i in range(k + 1) if i != drop])
    w, v = w[keep], v[:, keep]
    order = np.argsort(w)
    return (w[order], v[:, order]) if vectors else w[order]


def crossing_scan(
    g1: Grid1D,
    g2: Grid1D,
    c1: float,
    c2: float,
    s_range: Sequence[float],
    samples: int,
    *,
    analytic: Optional[Sequence[Fraction]] = None,
    rtol: float = 1e-6,
    touch_tol: float = 1e-5,
) -> list[Crossing]:
    """Locate s where the discrete J_s (constants removed) becomes singular.

    A change in the negative-eigenvalue count between consecutive samples
    brackets a crossing, refined by bisection to relative width ``rtol``.
    Local minima of the smallest |eigenvalue| with no count change
    (opposite branches crossing together) are refined by golden-section
    search and kept when they reach ``touch_tol``.  When ``analytic``
    instants are given, each crossing is matched to the nearest one.
    """
    lo, hi = float(s_range[0]), float(s_range[1])
    if not (0 < lo < hi):
        raise ValueError("s_range must satisfy 0 < lo < hi")
    if samples < 2:
        raise ValueError("need at least two samples")
    js = _js_family(g1, g2, c1, c2)

    def count(s):
        return negative_count(js(s))

    def gap(s):
        return float(abs(nearest_zero_eigenpairs(js(s), 1)[0]))

    grid = np.linspace(lo, hi, samples)
    counts = [count(s) for s in grid]
    found: list[Crossing] = []

    def bisect(a, na, b, nb):
        while b - a > rtol * 0.5 * (a + b):
            mid = 0.5 * (a + b)
            nm = count(mid)
            if nm != na and nm != nb:
                bisect(mid, nm, b, nb)
                b, nb = mid, nm
            elif nm != na:
                b, nb = mid, nm
            else:
                a, na = mid, nm
        found.append(Crossing(float(0.5 * (a + b)), (float(a), float(b)), "sign_change"))

    for k in range(samples - 1):
        if counts[k] != counts[k + 1]:
            bisect(grid[k], counts[k], grid[k + 1], counts[k + 1])

    gaps = [gap(s) for s in grid]
    invphi = (math.sqrt(5) - 1) / 2
    for k in range(1, samples - 1):
        if not (gaps[k] <= gaps[k - 1] and gaps[k] <= gaps[k + 1]):
            continue
        if counts[k - 1] != counts[k] or counts[k] != counts[k + 1]:
            continue
        a, b = grid[k - 1], grid[k + 1]
        x1, x2 = b - invphi * (b - a), a + invphi * (b - a)
        f1, f2 = gap(x1), gap(x2)
        while b - a > rtol * 0.5 * (a + b):
            if f1 <= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - invphi * (b - a)
                f1 = gap(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + invphi * (b - a)
                f2 = gap(x2)
        s_min = 0.5 * (a + b)
        if gap(s_min) <= touch_tol:
            found.append(Crossing(float(s_min), (float(a), float(b)), "touch"))

    found.sort(key=lambda c: c.s_estimate)
    merged: list[Crossing] = []
    for c in found:
        if merged and abs(c.s_estimate - merged[-1].s_estimate) <= 10 * rtol * c.s_estimate:
            continue
        merged.append(c)

    if analytic:
        targets = [Fraction(a) for a in analytic]
        matched = []
        for c in merged:
            best = min(targets, key=lambda t: abs(float(t) - c.s_estimate))
            dev = abs(c.s_estimate - float(best)) / float(best)
            matched.append(Crossing(c.s_estimate, c.bracket, c.kind, best, dev))
        merged = matched
    return merged


def analytic_instants(c1, c2, s_range, *, extra_modes: int = 2) -> list[Fraction]:
    """Exact instants for the flat circle x [0, pi] model with shift constants c1, c2."""
    from .product import ProductModel, _group, _increasing_branches, _decreasing_branches
    from .spectra import interval_neumann_spectrum, sphere_spectrum

    c1, c2 = Fraction(c1), Fraction(c2)
    lo, hi = Fraction(s_range[0]), Fraction(s_range[1])
    cap = max(c1 + c2 / lo, c2 + c1 * hi, c1, c2, Fraction(0))
    k = math.isqrt(math.ceil(cap)) + extra_modes
    model = ProductModel.from_constants(sphere_spectrum(1, k), interval_neumann_spectrum(k), c1, c2)
    # c1 = c2 = 0 only "degenerates" the excluded constant direction; no pair check here
    branches = _increasing_branches(model, lo) + _decreasing_branches(model, hi)
    return [d.s_star for d in _group(branches, lo, hi)]


# -- nonlinear Yamabe equation ----------------------------------------------


@dataclass(frozen=True)
class YamabeParams:
    """Constants of 4(m-1)/(m-2) Δu + R u - K u^((m+2)/(m-2)) = 0."""

    m: int
    R: float
    K: float

    def __post_init__(self):
        if self.m < 3:
            raise ValueError("m ≥ 3 required")

    @property
    def exponent(self) -> float:
        return (self.m + 2) / (self.m - 2)

    @property
    def coefficient(self) -> float:
        return 4 * (self.m - 1) / (self.m - 2)


def _positive(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("u must be strictly positive")
    return u


def yamabe_residual_vector(u, params: YamabeParams, op: DiscreteOperator) -> np.ndarray:
    u = _positive(u)
    return params.coefficient * op.apply(u) + params.R * u - params.K * u**params.exponent


def yamabe_residual(u, params: YamabeParams, op: DiscreteOperator) -> float:
    """Discrete L2 norm of the Yamabe residual.

    The Neumann condition is built into ``op``; with zero mean curvature the
    boundary equation reduces to a vanishing normal derivative.
    """
    return op.norm(yamabe_residual_vector(u, params, op))


def yamabe_linearization(u, params: YamabeParams, op: DiscreteOperator) -> sp.csr_matrix:
    """Jacobian of the residual vector at ``u``."""
    u = _positive(u)
    diag = params.R - params.K * params.exponent * u ** (params.exponent - 1)
    return (params.coefficient * op.matrix + sp.diags(diag)).tocsr()


@dataclass(frozen=True)
class WitnessFamily:
    """Discrete circle x interval family with synthetic constants c(s) = c1 + c2/s."""

    g1: Grid1D
    g2: Grid1D
    c1: float
    c2: float
    m: int = 4

    def shift(self, s: float) -> float:
        return float(self.c1) + float(self.c2) / s

    def js(self, s: float) -> DiscreteOperator:
        return assemble_product_Js(self.g1, self.g2, s, self.shift(s))

    def laplacian(self, s: float) -> DiscreteOperator:
        return assemble_product_Js(self.g1, self.g2, s, 0.0)

    def params(self, s: float) -> YamabeParams:
        # R/(m-1) = c(s); K = R keeps u = 1 an exact solution
        r = (self.m - 1) * self.shift(s)
        return YamabeParams(self.m, r, r)


@dataclass(frozen=True)
class ProbeReport:
    s: float
    epsilon: float
    converged: bool
    iterations: int
    residual: float
    non_constancy: float
    label: str
    history: tuple[float, ...] = field(default=(), repr=False)


def newton_branch_probe(
    family: WitnessFamily,
    s_star_estimate: float,
    *,
    epsilon: float = 1e-2,
    offset: float = 1e-2,
    max_iter: int = 100,
    max_halvings: int = 30,
    tol: float = 1e-10,
    accept: float = 1e-8,
) -> ProbeReport:
    """Damped Newton on the discrete Yamabe equation just past a crossing.

    Starts from 1 + epsilon * (kernel vector of J at ``s_star_estimate``)
    at s = s_star_estimate * (1 + offset).  Reaching a non-constant root is
    reported as a witnessed branch, falling back to u = 1 as "no branch
    found"; neither is an error.
    """
    s = s_star_estimate * (1 + offset)
    n = family.g1.points * family.g2.points
    if epsilon != 0:
        _, v = nearest_zero_eigenpairs(family.js(s_star_estimate), 1, vectors=True)
        kernel = v[:, 0]
        kernel = kernel / np.max(np.abs(kernel))
        u = 1.0 + epsilon * kernel
    else:
        u = np.ones(n)
    op = family.laplacian(s)
    params = family.params(s)

    res = yamabe_residual(u, params, op)
    history = [res]
    converged = res <= tol
    it = 0
    while not converged and it < max_iter:
        it += 1
        f = yamabe_residual_vector(u, params, op)
        step = spla.spsolve(yamabe_linearization(u, params, op).tocsc(), -f)
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = u + lam * step
            if np.all(trial > 0):
                trial_res = yamabe_residual(trial, params, op)
                if trial_res < res:
                    break
            lam *= 0.5
        else:
            break  # no descent: stagnated at round-off or diverging
        u, res = trial, trial_res
        history.append(res)
        converged = res <= tol
    converged = converged or res <= accept

    non_constancy = float(np.std(u))
    if not converged:
        label = "diverged"
    elif res < accept and non_constancy > 10 * abs(epsilon) and non_constancy > 1e-12:
        label = "nontrivial solution witnessed"
    else:
        label = "no branch found"
    return ProbeReport(s, epsilon, converged, it, res, non_constancy, label, tuple(history))


def hemisphere_neumann_eigenvalues(cells: int, m_max: int, count: int) -> dict[int, np.ndarray]:
    """Finite-volume Neumann eigenvalues of the upper unit hemisphere, by azimuthal order.

    For each m the Legendre operator -d/dx((1-x^2) du/dx) + m^2/(1-x^2) u is
    discretized on x = cos(theta) in [0, 1]; zero flux at the equator x = 0
    is the Neumann condition and the flux weight vanishes at the pole.
    Returns the ``count`` smallest eigenvalues for each m = 0..m_max.
    """
    h = 1.0 / cells
    centres = h * (np.arange(cells) + 0.5)
    faces = h * np.arange(cells + 1)
    p = 1.0 - faces**2
    p[0] = 0.0  # equator: Neumann
    out = {}
    for m in range(m_max + 1):
        main = (p[:-1] + p[1:]) / h**2 + m * m / (1.0 - centres**2)
        off = -p[1:-1] / h**2
        w = scipy.linalg.eigh_tridiagonal(main, off, eigvals_only=True, select="i", select_range=(0, count - 1))
        out[m] = w
    return out
