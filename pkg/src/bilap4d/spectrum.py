"""Mode-decomposed linearized operators and their near-zero spectra.

Angular decomposition on S^3 reduces the linearization Lap^2 - V(r) to
one fourth-order radial operator per mode number ell, with the radial
Laplacian carrying the ell(ell+2)/r^2 centrifugal term.  Two potentials
matter here: the limit-shape linearization V = e^Z on a large truncated
ball, whose bounded kernel profiles are 4 + rZ' (ell = 0, the dilation
direction) and Z' (ell = 1, translations), and the solution
linearization V = p (u+)^(p-1) on the unit ball with clamped edge
conditions, whose eigenvalues near zero decide non-degeneracy.

The discrete eigenproblem collocates the composed operator at interior
nodes and substitutes the essential conditions (value and derivative
at the outer edge, value at the origin for ell >= 1) into the unknown
vector.  The r^3 volume weight of the underlying quadratic form is a
pure row scaling of this pencil, invisible to the spectrum and zero at
the origin node, so the pencil itself stays unweighted; the weight
reappears in the weak-form symmetry diagnostic and in the inner
product used to track modes along a branch.  Against the closed-form
clamped-plate spectrum (Bessel crossings) this discretization is
accurate to the eigensolver tolerance, and its computed spectra stay
real through the concentration regime, where the potential spans
thirty-nine orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigs, splu

from . import greenball
from .bubble import PROFILE
from .errors import InvalidArgumentError, SolverError
from .numerics import (
    RadialField,
    RadialGrid,
    _simpson_weights,
    extended_nodes,
    mode_laplacian_apply_extended,
    mode_laplacian_matrix,
)
from .solver import Branch, RadialSolution, _edge_rows, _positive_power

MAX_MODE = 6
MAX_EIGENVALUES = 10
SHAPE_WINDOW = 5.0      # rescaled radius |y| <= 5 for profile projections
_SHAPE_SCALE_SQ = 8.0 * np.sqrt(6.0)
_MATCH_THRESHOLD = 0.5  # weighted correlation needed to call two modes the same


# ---------------------------------------------------------------------------
# operators


def _weight_vector(grid: RadialGrid) -> np.ndarray:
    """Quadrature weights of integrate_r3 as a diagonal: w r^3 g'."""
    return _simpson_weights(grid.n) * grid.dt * grid.r ** 3 * grid.gp


@dataclass(frozen=True)
class ModeOperator:
    """Clamped fourth-order radial operator (Lap_ell)^2 - potential.

    operator and mass form the generalized pencil: rows collocate
    (Lap_ell)^2 - V at the unconstrained nodes, with the essential
    conditions xi = xi' = 0 at the outer edge (and xi(0) = 0 for
    ell >= 1) substituted through the reduction map, whose columns span
    the admissible grid functions.  The r^3 volume weight enters the
    weighted pencil as a pure row scaling that cancels from the
    spectrum, and its origin-node value is zero, so the pencil is kept
    in the equivalent unweighted form; the weight itself carries the
    symmetry diagnostic and the mode-matching inner product.  The
    centrifugal ell(ell+2)/r^2 coefficient rides inside the mode
    Laplacian, so consistency with ell is inherited from its
    construction.
    """

    ell: int
    grid: RadialGrid
    potential: RadialField
    operator: sparse.csr_matrix
    mass: sparse.csr_matrix
    reduction: sparse.csr_matrix

    @property
    def size(self) -> int:
        return self.operator.shape[0]

    def profile(self, reduced: np.ndarray) -> np.ndarray:
        """Grid values of a reduced eigenvector (constraints restored)."""
        return self.reduction @ np.asarray(reduced)


def _reduction_map(grid: RadialGrid, ell: int) -> sparse.csr_matrix:
    """Columns span the grid functions with xi(r_max) = xi'(r_max) = 0.

    The edge derivative row eliminates the next-to-last value; for
    ell >= 1 the origin value is dropped as well.
    """
    n = grid.n
    edge = _edge_rows(grid)[0]     # d/dt weights on the last 6 nodes
    lo = 1 if ell >= 1 else 0
    T = sparse.lil_matrix((n + 1, n - 1 - lo))
    for j in range(n - 1 - lo):
        T[lo + j, j] = 1.0
    # edge @ xi[n-5:] = 0 with xi[n] = 0 fixes xi[n-1]
    for k in range(4):
        T[n - 1, n - 5 + k - lo] = -edge[k] / edge[4]
    return T.tocsr()


def _assemble(grid: RadialGrid, ell: int, potential: np.ndarray) -> ModeOperator:
    if ell < 0 or ell > MAX_MODE:
        raise InvalidArgumentError(f"mode index must lie in 0..{MAX_MODE}, got {ell}")
    V = np.asarray(potential, dtype=float)
    if V.shape != grid.r.shape:
        raise InvalidArgumentError("potential length does not match grid")

    n = grid.n
    L = mode_laplacian_matrix(grid, ell)
    A = (L @ L - sparse.diags(V)).tocsr()
    T = _reduction_map(grid, ell)
    lo = 1 if ell >= 1 else 0
    rows = np.arange(lo, n - 1)
    K = (A[rows, :] @ T).tocsr()
    M = sparse.identity(K.shape[0], format="csr")
    return ModeOperator(
        ell=ell,
        grid=grid,
        potential=RadialField(grid, V, ell),
        operator=K,
        mass=M,
        reduction=T,
    )


def solution_mode_operator(sol: RadialSolution, ell: int) -> ModeOperator:
    """Linearization at a converged solution: potential p (u+)^(p-1)."""
    amp = float(np.exp(sol.log_amplitude))   # u(0)^(p-1)
    V = sol.p * amp * _positive_power(sol.v.astype(float), sol.p - 1.0)
    return _assemble(sol.grid, ell, V)


def liouville_mode_operator(grid: RadialGrid, ell: int) -> ModeOperator:
    """Limit-shape linearization e^Z on a large truncated domain."""
    return _assemble(grid, ell, PROFILE.exp_z(grid.r))


@dataclass(frozen=True)
class AsymmetryCheck:
    """Symmetry of the operator in the r^3 dr inner product.

    raw pairs smooth admissible test functions both ways through the
    weighted fourth-order action and reports the worst relative
    mismatch; symmetrized is the same quantity after averaging the two
    pairings, identically zero by construction.
    """

    raw: float
    symmetrized: float


def operator_asymmetry(op: ModeOperator, trials: int = 3) -> AsymmetryCheck:
    """Measure the weighted weak-form symmetry defect of the operator.

    The pairings run in extended precision at the extended nodes; the
    raw defect collects quadrature plus stencil asymmetry and shrinks
    at stencil order under refinement.
    """
    grid, ell = op.grid, op.ell
    ld = np.longdouble
    rx = extended_nodes(grid) / ld(grid.r_max)
    V = op.potential.values.astype(ld)
    w = _weight_vector(grid).astype(ld)

    def action(f):
        lap = mode_laplacian_apply_extended(grid, f, ell)
        return mode_laplacian_apply_extended(grid, lap, ell) - V * f

    worst = 0.0
    for k in range(trials):
        x = (1.0 - rx ** 2) ** 2 * rx ** ell * np.cos((k + 1) * rx)
        y = (1.0 - rx ** 2) ** 2 * rx ** ell * (1.0 + rx ** 2 / ld(k + 2.0))
        ax, ay = action(x), action(y)
        left = float(np.dot(w, y * ax))
        right = float(np.dot(w, x * ay))
        sym = 0.5 * (left + right)
        scale = max(float(np.dot(w, np.abs(y * ax))), float(np.dot(w, np.abs(x * ay))))
        scale = max(scale, 1e-300)
        worst = max(worst, abs(left - right) / scale)
    return AsymmetryCheck(raw=worst, symmetrized=abs(sym - sym) / scale)


# ---------------------------------------------------------------------------
# eigensolver


@dataclass(frozen=True)
class ModeEigenvalues:
    """Smallest-magnitude eigenvalues of one clamped mode operator."""

    p: float
    ell: int
    eigenvalues: np.ndarray      # sorted by |lambda|
    vectors: np.ndarray          # xi profiles on the grid, row per eigenvalue
    eps_p: float

    @property
    def min_abs(self) -> float:
        return float(np.min(np.abs(self.eigenvalues)))

    @property
    def nearest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def negative_count(self) -> int:
        return int(np.count_nonzero(self.eigenvalues < 0.0))

    @property
    def scaled_min_abs(self) -> float:
        # eps^4 Lap^2 is the O(1) operator in the concentration frame
        return self.min_abs * self.eps_p ** 4


def _smallest_eigenpairs(op: ModeOperator, count: int, sigma: float = 0.0):
    """Eigenvalues of the pencil nearest the shift, with grid profiles.

    Row equilibration before factorization is another row scaling of
    the pencil, harmless to the spectrum; the computed eigenvalues are
    real for this discretization, and residual imaginary parts beyond
    rounding are treated as a solver failure.
    """
    K, M = op.operator, op.mass
    shifted = (K - sigma * M).tocsr()
    scale = np.abs(shifted).max(axis=1).toarray().ravel()
    R = sparse.diags(1.0 / np.maximum(scale, 1e-300))
    try:
        lu = splu((R @ shifted).tocsc())
        Ms = (R @ M).tocsr()

        def matvec(x):
            return lu.solve(Ms @ x)

        N = K.shape[0]
        apply = LinearOperator((N, N), matvec=matvec)
        v0 = np.ones(N) / np.sqrt(N)
        nus, vecs = eigs(apply, k=count, which="LM", v0=v0, maxiter=600)
    except (ArpackError, ArpackNoConvergence, RuntimeError) as err:
        raise SolverError(f"eigensolver breakdown for mode {op.ell}: {err}") from err

    if np.any(np.abs(nus) < 1e-290):
        raise SolverError(f"eigensolver returned defective pairs for mode {op.ell}")
    lams = sigma + 1.0 / nus
    if np.any(np.abs(lams.imag) > 1e-8 * (np.abs(lams.real) + 1.0)):
        raise SolverError(
            f"eigensolver breakdown for mode {op.ell}: complex eigenvalues "
            f"{lams[np.argmax(np.abs(lams.imag))]}"
        )
    order = np.argsort(np.abs(lams.real))
    lams = lams.real[order]
    profiles = []
    for j in order:
        xi = op.profile(vecs[:, j].real)
        peak = np.argmax(np.abs(xi))
        if xi[peak] != 0.0:
            xi = xi / xi[peak]
        profiles.append(xi)
    return lams, np.array(profiles)


def mode_eigenvalues(
    sol: RadialSolution, ell: int, count: int = 6, sigma: float = 0.0
) -> ModeEigenvalues:
    """Eigenvalues of the solution linearization nearest the shift.

    The potential is p (u+)^(p-1), zero wherever the solution is not
    positive; shift-inversion targets the eigenvalues closest to sigma
    (default zero, the non-degeneracy question).
    """
    if count < 1 or count > MAX_EIGENVALUES:
        raise InvalidArgumentError(
            f"count must lie in 1..{MAX_EIGENVALUES}, got {count}"
        )
    op = solution_mode_operator(sol, ell)
    lams, profiles = _smallest_eigenpairs(op, count, sigma)
    return ModeEigenvalues(
        p=sol.p, ell=ell, eigenvalues=lams, vectors=profiles, eps_p=sol.eps_p
    )


# ---------------------------------------------------------------------------
# limit-shape kernel


@dataclass(frozen=True)
class LiouvilleKernelReport:
    """Discrete residuals of the two bounded kernel profiles.

    v0 = 4 + rZ' solves the radial linearized equation and v1 = Z' the
    first-mode one; residuals are sup norms over the inner half of the
    window of (Lap_ell)^2 v - e^Z v, evaluated through the first-order
    system with the closed-form intermediate w = Lap_ell v.  Composing
    the discrete second-order apply twice instead loses accuracy at
    the origin-adjacent nodes for mode 1 (the centrifugal 1/r^2 term
    amplifies the first apply's ~h^4/r truncation into ~h^4/r^3); the
    composed values are kept for transparency.  The eigenvalue lists
    probe the truncated operators near zero, where clamping at r_max
    perturbs the kernel directions measurably.
    """

    r_max: float
    v0_residual: float
    v1_residual: float
    v0_origin: float
    v0_residual_composed: float
    v1_residual_composed: float
    l0_eigenvalues: np.ndarray
    l1_eigenvalues: np.ndarray

    @property
    def min_abs_l0(self) -> float:
        return float(np.min(np.abs(self.l0_eigenvalues)))

    @property
    def min_abs_l1(self) -> float:
        return float(np.min(np.abs(self.l1_eigenvalues)))


def default_liouville_grid(r_max: float = 200.0, n: int = 3072) -> RadialGrid:
    """Truncated whole-space grid: ~0.02 spacing in the core."""
    target = n * 0.02 / r_max
    beta = brentq(lambda b: b / np.sinh(b) - target, 1e-3, 50.0, xtol=1e-12)
    return RadialGrid.sinh_graded(r_max, n, beta)


def liouville_kernel_check(
    grid: Optional[RadialGrid] = None, count: int = 4
) -> LiouvilleKernelReport:
    """Verify the bounded kernel profiles of the limit-shape linearization."""
    if grid is None:
        grid = default_liouville_grid()
    if grid.r_max < 100.0:
        raise InvalidArgumentError(
            f"kernel check needs r_max >= 100, got {grid.r_max}"
        )
    # profile arithmetic in longdouble at the extended nodes: the
    # composed fourth-order apply amplifies float64 sampling jitter
    # into a ~1e-5 floor otherwise
    ld = np.longdouble
    rx = extended_nodes(grid)
    a2 = ld(8.0) * np.sqrt(ld(6.0))
    dz = -8.0 * rx / (a2 + rx ** 2)
    ez = (a2 / (a2 + rx ** 2)) ** 4

    # closed-form intermediates: Lap_0 v0 and Lap_1 v1 = (Lap_0 Z)'
    s = a2 + rx ** 2
    v0 = 4.0 + rx * dz
    w0 = -64.0 * a2 ** 2 / s ** 3
    v1 = dz
    w1 = 32.0 * rx * (3.0 * a2 + rx ** 2) / s ** 3

    def system_residual(v, w, ell):
        ra = mode_laplacian_apply_extended(grid, v, ell) - w
        rb = mode_laplacian_apply_extended(grid, w, ell) - ez * v
        return np.maximum(np.abs(ra), np.abs(rb)).astype(float)

    res0 = system_residual(v0, w0, 0)
    res1 = system_residual(v1, w1, 1)
    lap = mode_laplacian_apply_extended(grid, v0, 0)
    comp0 = (mode_laplacian_apply_extended(grid, lap, 0) - ez * v0).astype(float)
    lap = mode_laplacian_apply_extended(grid, v1, 1)
    comp1 = (mode_laplacian_apply_extended(grid, lap, 1) - ez * v1).astype(float)
    inner = grid.r <= grid.r_max / 2.0

    l0, _ = _smallest_eigenpairs(liouville_mode_operator(grid, 0), count)
    l1, _ = _smallest_eigenpairs(liouville_mode_operator(grid, 1), count)
    return LiouvilleKernelReport(
        r_max=grid.r_max,
        v0_residual=float(np.max(res0[inner])),
        v1_residual=float(np.max(res1[inner])),
        v0_origin=float(v0[0]),
        v0_residual_composed=float(np.max(np.abs(comp0[inner]))),
        v1_residual_composed=float(np.max(np.abs(comp1[inner]))),
        l0_eigenvalues=l0,
        l1_eigenvalues=l1,
    )


# ---------------------------------------------------------------------------
# eigenfunction shapes


@dataclass(frozen=True)
class ShapeCoefficients:
    """Concentration-frame projection of an eigenfunction.

    The window profile (sup-normalized on |y| <= 5) is projected onto
    the mode's own limit shape, (8 sqrt 6 - y^2)/(8 sqrt 6 + y^2) for
    mode 0 and y/(8 sqrt 6 + y^2) for mode 1; residual is the relative
    l2 misfit against that single profile, the other coefficient is
    the cross-projection (contamination diagnostic), and a_p is the
    diagnostic p int (u+)^(p-1) xi over the ball (angular volume
    2 pi^2 included).
    """

    p: float
    ell: int
    eigenvalue: float
    a_coeff: float
    b_coeff: float
    residual: float
    a_p: float
    window_nodes: int


def eigen_shape_check(
    sol: RadialSolution, modes: ModeEigenvalues, index: int = 0
) -> ShapeCoefficients:
    if modes.ell not in (0, 1):
        raise InvalidArgumentError(
            f"shape profiles exist for modes 0 and 1, got {modes.ell}"
        )
    if index < 0 or index >= len(modes.eigenvalues):
        raise InvalidArgumentError(f"eigenpair index {index} out of range")
    eps = sol.eps_p
    mask = sol.grid.r <= SHAPE_WINDOW * eps * (1.0 + 1e-12)
    if np.count_nonzero(mask) < 8:
        raise InvalidArgumentError(
            "grid does not resolve the concentration length for this solution"
        )
    xi = modes.vectors[index]
    y = sol.grid.r[mask] / eps
    w = xi[mask]
    sup = np.max(np.abs(w))
    if sup == 0.0:
        raise InvalidArgumentError("eigenfunction vanishes on the window")
    w = w / sup

    phi0 = (_SHAPE_SCALE_SQ - y ** 2) / (_SHAPE_SCALE_SQ + y ** 2)
    phi1 = y / (_SHAPE_SCALE_SQ + y ** 2)
    a = float(np.dot(w, phi0) / np.dot(phi0, phi0))
    b = float(np.dot(w, phi1) / np.dot(phi1, phi1))
    own = a * phi0 if modes.ell == 0 else b * phi1
    misfit = float(np.linalg.norm(w - own) / np.linalg.norm(w))

    amp = float(np.exp(sol.log_amplitude))
    dens = sol.p * amp * _positive_power(sol.v.astype(float), sol.p - 1.0)
    a_p = 2.0 * np.pi ** 2 * sol.grid.integrate_r3(dens * (xi / sup))
    return ShapeCoefficients(
        p=sol.p,
        ell=modes.ell,
        eigenvalue=float(modes.eigenvalues[index]),
        a_coeff=a,
        b_coeff=b,
        residual=misfit,
        a_p=a_p,
        window_nodes=int(np.count_nonzero(mask)),
    )


# ---------------------------------------------------------------------------
# branch scan


def _mode_correlation(
    grid_a: RadialGrid, xi_a: np.ndarray, grid_b: RadialGrid, xi_b: np.ndarray
) -> float:
    """Weighted overlap of two profiles, on the second profile's grid."""
    va = np.interp(grid_b.r, grid_a.r, xi_a)
    w = _weight_vector(grid_b)
    na = np.dot(w, va * va)
    nb = np.dot(w, xi_b * xi_b)
    if na <= 0.0 or nb <= 0.0:
        return 0.0
    return float(abs(np.dot(w, va * xi_b)) / np.sqrt(na * nb))


def _match_modes(prev_sol, prev_modes, sol, modes):
    """Pair eigenvalues of consecutive records by eigenvector overlap.

    Returns (j, k, correlation) triples, best matches first; a mode
    whose best overlap falls below the threshold is left unmatched
    (it left or entered the near-zero window).
    """
    corr = np.array(
        [
            [
                _mode_correlation(prev_sol.grid, va, sol.grid, vb)
                for vb in modes.vectors
            ]
            for va in prev_modes.vectors
        ]
    )
    pairs = []
    used_j, used_k = set(), set()
    for _ in range(min(corr.shape)):
        j, k = np.unravel_index(np.argmax(corr), corr.shape)
        if corr[j, k] < _MATCH_THRESHOLD:
            break
        pairs.append((int(j), int(k), float(corr[j, k])))
        used_j.add(j)
        used_k.add(k)
        corr[j, :] = -1.0
        corr[:, k] = -1.0
    return pairs


@dataclass(frozen=True)
class SpectrumReport:
    """Near-zero spectra along a continuation branch.

    rows hold one ModeEigenvalues per scanned (p, ell); shapes the
    mode-0/1 projections of the eigenfunction nearest zero.  Tracking
    matches eigenvectors of consecutive scanned exponents by weighted
    overlap; a zero crossing flag for a mode records a matched pair
    whose eigenvalue changed sign.  The interaction Hessian eigenvalues
    at the single-point configuration accompany the scan as the
    domain-side non-degeneracy gate.
    """

    rows: tuple
    shapes: tuple
    zero_crossings: dict
    hessian_eigenvalues: np.ndarray
    hessian_nondegenerate: bool

    @property
    def min_abs_eig(self) -> float:
        return min(row.min_abs for row in self.rows)

    @property
    def any_crossing(self) -> bool:
        return any(self.zero_crossings.values())

    @property
    def min_abs_by_p(self) -> dict:
        out: dict = {}
        for row in self.rows:
            out[row.p] = min(out.get(row.p, np.inf), row.min_abs)
        return out

    def as_rows(self) -> list:
        """Serializable per-(p, ell) records."""
        shape_key = {(s.p, s.ell): s for s in self.shapes}
        out = []
        for row in self.rows:
            s = shape_key.get((row.p, row.ell))
            out.append(
                {
                    "p": row.p,
                    "l": row.ell,
                    "eigs": [float(v) for v in row.eigenvalues],
                    "min_abs_eig": row.min_abs,
                    "scaled_min_abs_eig": row.scaled_min_abs,
                    "a_coeff": None if s is None else s.a_coeff,
                    "b_coeff": None if s is None else s.b_coeff,
                    "A_p": None if s is None else s.a_p,
                }
            )
        return out


def nondegeneracy_scan(
    branch: Branch,
    ell_max: int = 4,
    count: int = 6,
    max_records: int = 24,
) -> SpectrumReport:
    """Scan the branch for eigenvalues crossing zero in modes <= ell_max.

    Long branches are subsampled evenly (endpoints always kept) to keep
    the solve count proportionate; rows come out ordered by (p, ell).
    A crossing flag means some tracked eigenvalue changed sign between
    consecutive scanned exponents while its eigenvector stayed
    recognizably the same mode.
    """
    if ell_max < 0 or ell_max > MAX_MODE:
        raise InvalidArgumentError(f"ell_max must lie in 0..{MAX_MODE}")
    if max_records < 2:
        raise InvalidArgumentError("scan needs at least two records")
    total = len(branch.records)
    if total < 2:
        raise InvalidArgumentError("branch has fewer than two records")
    idx = np.unique(np.linspace(0, total - 1, min(max_records, total)).round().astype(int))

    rows = []
    shapes = []
    crossings = {ell: False for ell in range(ell_max + 1)}
    prev: dict = {}
    for i in idx:
        sol = branch.records[i].solution
        for ell in range(ell_max + 1):
            modes = mode_eigenvalues(sol, ell, count=count)
            rows.append(modes)
            if ell <= 1:
                shapes.append(eigen_shape_check(sol, modes))
            if ell in prev:
                prev_sol, prev_modes = prev[ell]
                for j, k, _ in _match_modes(prev_sol, prev_modes, sol, modes):
                    a = prev_modes.eigenvalues[j]
                    b = modes.eigenvalues[k]
                    if a * b < 0.0:
                        crossings[ell] = True
            prev[ell] = (sol, modes)

    gate = greenball.kirchhoff_routh(np.zeros((1, 4)))
    return SpectrumReport(
        rows=tuple(rows),
        shapes=tuple(shapes),
        zero_crossings=crossings,
        hessian_eigenvalues=gate.hessian_eigenvalues,
        hessian_nondegenerate=gate.nondegenerate,
    )
