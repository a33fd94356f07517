"""Radial Newton solver and exponent continuation for the clamped problem.

The target is Lap^2 u = (u+)^p on the unit ball of R^4 with u = u' = 0 at
r = 1, solved as the coupled second-order system Lap u = w, Lap w = (u+)^p
on a graded radial grid.  Unknowns are the normalized profile v = u/u(0),
its Laplacian, and the log amplitude lam = ln u(0)^(p-1); the nonlinear
term enters only as exp(lam + p ln v), so the iteration stays inside
double range far beyond where u(0)^p itself would overflow, and the
amplitude identity eps_p^4 p u(0)^(p-1) = 1 holds by construction.

Newton iterates are kept in extended precision and residuals evaluated
through the extended-precision operator apply.  The 1/h^2 amplification
of node rounding is what sets the residual floor; in plain double that
floor sits near the convergence threshold once the grid is fine, while
extended iterates push it three orders lower.

The concentration length eps_p shrinks like e^(-p/8), so the grid is
rebuilt with a deeper sinh grading whenever the predicted eps halves;
profiles are re-interpolated onto the new nodes and re-converged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline, make_interp_spline
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve

from . import bubble, pohozaev
from .errors import (
    AccuracyError,
    InvalidArgumentError,
    SolverError,
    TrivialSolutionError,
)
from .numerics import (
    RadialGrid,
    extended_nodes,
    fornberg_weights,
    mode_laplacian_apply_extended,
    mode_laplacian_matrix,
)
from .pohozaev import RadialProfile

SQRT_E = float(np.exp(0.5))
MASS_LIMIT = 64.0 * np.pi ** 2             # limit of (p/u_max) C_p
ENERGY_LIMIT = 64.0 * np.pi ** 2 * SQRT_E  # limit of p C_p and p int |Lap u|^2
C1_PREDICTED = 2.0 + 2.0 * np.log(8.0 * np.sqrt(6.0)) + 8.0 / 3.0
C2_PREDICTED = -0.5 - 0.5 * np.log(8.0 * np.sqrt(6.0)) - 13.0 / 24.0

RESIDUAL_TOL = 1e-11
MAX_ITERATIONS = 60
CORE_RESOLUTION = 16.0      # nodes per concentration length near r = 0
DEFAULT_GRID_SIZE = 1536
DEFAULT_AMPLITUDES = (2.0, 5.0, 10.0, 20.0)
BUBBLE_SEED_MIN = 6.0       # cold starts switch to the limit-shape seed here
MAX_EXPONENT = 500.0        # keeps exp(lam) inside double range
_COLLAPSE_AMPLITUDE = 0.05  # u(0) below this counts as the trivial branch


def _eps_guess(p: float) -> float:
    """A-priori concentration length, from the fitted-law constants."""
    return float(np.exp(-p / 8.0 + C2_PREDICTED))


def solver_grid(eps: float, n: int = DEFAULT_GRID_SIZE) -> RadialGrid:
    """Unit-ball grid with about CORE_RESOLUTION nodes per eps at r = 0.

    Uses the sinh grading once a uniform grid can no longer afford that
    resolution; the grading also leaves a geometric ramp of spacings
    toward r = 1, where the profile bends into the clamped boundary.
    """
    if not eps > 0.0:
        raise InvalidArgumentError(f"concentration length must be positive, got {eps}")
    if n < 64:
        raise InvalidArgumentError("grid too coarse for the solver stencils")
    target = n * eps / CORE_RESOLUTION
    if target >= 0.9:
        return RadialGrid.uniform(1.0, n)
    beta = brentq(lambda b: b / np.sinh(b) - target, 1e-3, 200.0, xtol=1e-12)
    return RadialGrid.sinh_graded(1.0, n, beta)


def _positive_power(values: np.ndarray, p) -> np.ndarray:
    """(x+)^p with one-sided zero below 0, computed through logs."""
    vals = np.asarray(values)
    out = np.zeros_like(vals)
    mask = vals > 0
    out[mask] = np.exp(p * np.log(vals[mask]))
    return out


def _edge_rows(grid: RadialGrid):
    """d/dt at t = 1 on the last six nodes, in double and extended."""
    cached = grid._cache.get("solver_edge")
    if cached is None:
        ld = np.longdouble
        t64 = np.arange(grid.n - 5, grid.n + 1, dtype=float) / grid.n
        tld = np.arange(grid.n - 5, grid.n + 1, dtype=ld) / ld(grid.n)
        cached = (
            fornberg_weights(1.0, t64, 1)[1],
            fornberg_weights(ld(1.0), tld, 1)[1],
        )
        grid._cache["solver_edge"] = cached
    return cached


@dataclass
class RadialSolution:
    """Converged profile at one exponent.

    v holds u/u(0) at the nodes and w_scaled its Laplacian, both in the
    extended precision the Newton iteration left them in; log_amplitude
    is ln u(0)^(p-1).  profile() packages quintic-spline evaluators of
    u and its radial derivatives for the surface-form identity checks.
    """

    grid: RadialGrid
    p: float
    v: np.ndarray
    w_scaled: np.ndarray
    log_amplitude: float
    newton_residual: float
    iterations: int
    _splines: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def u_max(self) -> float:
        return float(np.exp(self.log_amplitude / (self.p - 1.0)))

    @property
    def eps_p(self) -> float:
        return float(np.exp(-(np.log(self.p) + self.log_amplitude) / 4.0))

    @property
    def u_values(self) -> np.ndarray:
        return self.u_max * self.v.astype(float)

    @property
    def w_values(self) -> np.ndarray:
        return self.u_max * self.w_scaled.astype(float)

    def _spline(self, key: str):
        sp = self._splines.get(key)
        if sp is None:
            vals = self.v if key == "v" else self.w_scaled
            sp = make_interp_spline(self.grid.r, vals.astype(float), k=5)
            self._splines[key] = sp
        return sp

    def profile(self) -> RadialProfile:
        """Spline evaluators of u, Lap u, and radial derivatives to 3rd order.

        u''' and (Lap u)'' are reconstructed through the radial identities
        u''' = w' - 3u''/r + 3u'/r^2 and w'' = (u+)^p - 3w'/r, so they
        stay single-differentiation accurate; both are only meant for
        evaluation away from the origin.
        """
        um = self.u_max
        p = self.p
        vs = self._spline("v")
        ws = self._spline("w")
        dv, d2v = vs.derivative(), vs.derivative(2)
        dw = ws.derivative()

        def u(r):
            return um * vs(r)

        def du(r):
            return um * dv(r)

        def d2u(r):
            return um * d2v(r)

        def w(r):
            return um * ws(r)

        def dw_fn(r):
            return um * dw(r)

        def d3u(r):
            r = np.asarray(r, dtype=float)
            return um * (dw(r) - 3.0 * d2v(r) / r + 3.0 * dv(r) / r ** 2)

        def d2w(r):
            r = np.asarray(r, dtype=float)
            return _positive_power(um * vs(r), p) - 3.0 * um * dw(r) / r

        return RadialProfile(u=u, du=du, d2u=d2u, w=w, dw=dw_fn, d3u=d3u, d2w=d2w)


def _residual(grid: RadialGrid, p: float, v, w, lam):
    """Extended-precision residual blocks with constraint rows substituted.

    Returns (F_v, F_w, F_norm, res) where res is the scaled sup residual:
    the first equation block is gauged by max|w|, the second by the
    amplitude exp(lam), and the constraint rows by their natural O(1)
    scales.
    """
    ld = np.longdouble
    n = grid.n
    Lv = mode_laplacian_apply_extended(grid, v, 0)
    Lw = mode_laplacian_apply_extended(grid, w, 0)
    amp = np.exp(ld(lam))
    Fv = Lv - w
    Fw = Lw - amp * _positive_power(v, ld(p))
    Fv[n] = v[n]
    Fw[n] = np.dot(_edge_rows(grid)[1], v[-6:])
    Fn = v[0] - ld(1.0)
    scale_v = max(1.0, float(np.max(np.abs(w))))
    res = max(
        float(np.max(np.abs(Fv[:n]))) / scale_v,
        float(np.max(np.abs(Fw[:n]))) / float(amp),
        abs(float(Fv[n])),
        abs(float(Fw[n])) / n,
        abs(float(Fn)),
    )
    return Fv, Fw, Fn, res


def _fixed_blocks(grid: RadialGrid):
    n = grid.n
    cached = grid._cache.get("solver_blocks")
    if cached is None:
        L = mode_laplacian_matrix(grid, 0)
        Lv = L.tolil(copy=True)
        Lv[n, :] = 0.0
        Lv[n, n] = 1.0
        Lw = L.tolil(copy=True)
        Lw[n, :] = 0.0
        mI = sparse.lil_matrix((n + 1, n + 1))
        mI.setdiag(-1.0)
        mI[n, n] = 0.0
        e0 = sparse.lil_matrix((1, n + 1))
        e0[0, 0] = 1.0
        cached = (Lv.tocsr(), Lw.tocsr(), mI.tocsr(), e0.tocsr())
        grid._cache["solver_blocks"] = cached
    return cached


def _jacobian(grid: RadialGrid, p: float, v64: np.ndarray, lam: float):
    n = grid.n
    Lv, Lw, mI, e0 = _fixed_blocks(grid)
    amp = float(np.exp(lam))
    pw = _positive_power(v64, p)
    pwm1 = _positive_power(v64, p - 1.0)

    Jwv = sparse.lil_matrix((n + 1, n + 1))
    Jwv.setdiag(-amp * p * pwm1)
    Jwv[n, :] = 0.0
    Jwv[n, n - 5:] = _edge_rows(grid)[0]

    col = -amp * pw
    col[n] = 0.0
    return sparse.bmat(
        [
            [Lv, mI, None],
            [Jwv.tocsr(), Lw, sparse.csr_matrix(col[:, None])],
            [e0, None, None],
        ],
        format="csr",
    )


def _newton(grid: RadialGrid, p: float, v0, w0, lam0: float):
    """Damped Newton on (v, w, lam); returns the extended-precision iterate.

    The line search descends the l2 norm of the row-equilibrated residual,
    for which the Newton step is a guaranteed descent direction; the
    convergence test is the scaled sup residual, which is the meaningful
    accuracy measure but is too flat far from the solution to steer by.
    """
    ld = np.longdouble
    n = grid.n
    v = np.asarray(v0, dtype=ld).copy()
    w = np.asarray(w0, dtype=ld).copy()
    lam = ld(lam0)
    collapse_gate = (p - 1.0) * np.log(_COLLAPSE_AMPLITUDE)

    Fv, Fw, Fn, res = _residual(grid, p, v, w, lam)
    for it in range(1, MAX_ITERATIONS + 1):
        if res < RESIDUAL_TOL:
            return v, w, float(lam), res, it - 1
        if float(lam) < collapse_gate:
            raise TrivialSolutionError(
                f"amplitude collapsed: u(0) = {np.exp(float(lam) / (p - 1.0)):.3e} at p = {p:g}"
            )

        J = _jacobian(grid, p, v.astype(float), float(lam))
        F = np.concatenate([Fv.astype(float), Fw.astype(float), [float(Fn)]])
        row_scale = 1.0 / np.maximum(np.abs(J).max(axis=1).toarray().ravel(), 1e-300)
        delta = spsolve((sparse.diags(row_scale) @ J).tocsc(), -F * row_scale)
        if not np.all(np.isfinite(delta)):
            raise SolverError(f"linear step produced non-finite values at p = {p:g}")
        dv = delta[: n + 1]
        dw = delta[n + 1 : 2 * n + 2]
        dlam = float(delta[2 * n + 2])

        merit0 = float(np.linalg.norm(F * row_scale))

        def merit(tFv, tFw, tFn):
            t = np.concatenate([tFv.astype(float), tFw.astype(float), [float(tFn)]])
            return float(np.linalg.norm(t * row_scale))

        # cap the amplitude move so cold starts cannot leave double range
        alpha = min(1.0, 5.0 / abs(dlam) if dlam != 0.0 else 1.0)
        accepted = False
        while alpha >= 1.0 / 4096.0:
            tv = v + ld(alpha) * dv.astype(ld)
            tw = w + ld(alpha) * dw.astype(ld)
            tlam = lam + ld(alpha) * ld(dlam)
            tFv, tFw, tFn, tres = _residual(grid, p, tv, tw, tlam)
            if merit(tFv, tFw, tFn) <= merit0 * (1.0 - 1e-4 * alpha) or tres < RESIDUAL_TOL:
                v, w, lam = tv, tw, tlam
                Fv, Fw, Fn, res = tFv, tFw, tFn, tres
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise SolverError(
                f"Newton line search stalled at residual {res:.3e} (p = {p:g})"
            )
    raise SolverError(
        f"Newton did not reach {RESIDUAL_TOL:g} in {MAX_ITERATIONS} iterations "
        f"(p = {p:g}, residual {res:.3e})"
    )


def _bubble_seed(grid: RadialGrid, p: float):
    """Concentration-shaped cold start with the matched log amplitude.

    v = exp(Z(r/eps)/p) reproduces 1 + Z/p in the core, stays positive,
    and its Laplacian is exact: Lap v = v ((Z'/p)^2 + Lap Z / p) / eps^2.
    """
    eps = _eps_guess(p)
    ld = np.longdouble
    y = (extended_nodes(grid) / ld(eps)).astype(float)
    z, dz, lapz, _ = bubble.bubble_eval(y)
    v0 = np.exp((z / p).astype(ld))
    w0 = v0 * (np.asarray((dz / p) ** 2 + lapz / p, dtype=ld) / ld(eps) ** 2)
    return v0, w0, -4.0 * np.log(eps) - np.log(p)


def newton_solve(
    p: float,
    grid: Optional[RadialGrid] = None,
    guess=None,
    amplitudes: Sequence[float] = DEFAULT_AMPLITUDES,
) -> RadialSolution:
    """Solve the coupled system at exponent p.

    A warm-start guess (v, w_scaled, log_amplitude) is used directly when
    given.  Cold starts use the concentration-shaped seed once p is large
    enough for the limit profile to be a good model, and otherwise the
    bump A(1-r^2)^2, walking the amplitude ladder until Newton converges.
    Collapse of the amplitude onto the excluded trivial branch raises
    TrivialSolutionError.
    """
    p = float(p)
    if p < 2.0:
        raise InvalidArgumentError(f"exponent must be at least 2, got {p}")
    if p > MAX_EXPONENT:
        raise InvalidArgumentError(
            f"exponent {p} exceeds the double-precision amplitude range ({MAX_EXPONENT:g})"
        )
    if grid is None:
        grid = solver_grid(_eps_guess(p))

    if guess is not None:
        v0, w0, lam0 = guess
        v, w, lam, res, its = _newton(grid, p, v0, w0, float(lam0))
        return RadialSolution(grid, p, v, w, lam, res, its)

    if p >= BUBBLE_SEED_MIN:
        v0, w0, lam0 = _bubble_seed(grid, p)
        v, w, lam, res, its = _newton(grid, p, v0, w0, lam0)
        return RadialSolution(grid, p, v, w, lam, res, its)

    r = extended_nodes(grid)
    v0 = (1.0 - r ** 2) ** 2
    w0 = -16.0 + 24.0 * r ** 2  # Lap (1-r^2)^2 in R^4
    failures = []
    for A in amplitudes:
        try:
            v, w, lam, res, its = _newton(grid, p, v0, w0, (p - 1.0) * np.log(A))
        except SolverError as err:  # includes TrivialSolutionError
            failures.append((A, err))
            continue
        return RadialSolution(grid, p, v, w, lam, res, its)
    if all(isinstance(err, TrivialSolutionError) for _, err in failures):
        raise TrivialSolutionError(
            f"every bump amplitude {tuple(amplitudes)} collapsed at p = {p:g}"
        )
    summary = "; ".join(f"A={A:g}: {err}" for A, err in failures)
    raise SolverError(f"no bump amplitude converged at p = {p:g} ({summary})")


def linear_biharmonic_solve(grid: RadialGrid, f_values: np.ndarray) -> np.ndarray:
    """Solve Lap^2 u = f with clamped conditions; a single linear solve.

    Exercises exactly the discrete blocks one Newton step uses, with the
    nonlinearity replaced by the fixed right side f.
    """
    n = grid.n
    f = np.asarray(f_values, dtype=float)
    if f.shape != grid.r.shape:
        raise InvalidArgumentError("right side length does not match grid")
    Lv, Lw, mI, _ = _fixed_blocks(grid)
    edge = sparse.lil_matrix((n + 1, n + 1))
    edge[n, n - 5:] = _edge_rows(grid)[0]
    J = sparse.bmat([[Lv, mI], [edge.tocsr(), Lw]], format="csr")
    rhs = np.concatenate([np.zeros(n + 1), f])
    rhs[n] = 0.0
    rhs[2 * n + 1] = 0.0
    row_scale = 1.0 / np.maximum(np.abs(J).max(axis=1).toarray().ravel(), 1e-300)
    sol = spsolve((sparse.diags(row_scale) @ J).tocsc(), rhs * row_scale)
    return sol[: n + 1]


# ---------------------------------------------------------------------------
# diagnostics and rescaled-profile comparisons


@dataclass(frozen=True)
class Diagnostics:
    """Concentration diagnostics of one converged solution.

    c_p is the ball integral of (u+)^p; energy is p int |Lap u|^2 with
    energy_crosscheck = p int (u+)^(p+1), equal for exact solutions by
    the clamped integration by parts; mass_check = (p/u_max) c_p tends
    to 64 pi^2 with a -13/(3p) first correction.
    """

    p: float
    u_max: float
    eps_p: float
    c_p: float
    energy: float
    energy_crosscheck: float
    mass_check: float


def diagnostics(sol: RadialSolution) -> Diagnostics:
    p, um = sol.p, sol.u_max
    v64 = sol.v.astype(float)
    w64 = sol.w_scaled.astype(float)
    amp_p = float(np.exp(p * sol.log_amplitude / (p - 1.0)))       # u_max^p
    amp_p1 = float(np.exp((p + 1.0) * sol.log_amplitude / (p - 1.0)))
    two_pi2 = 2.0 * np.pi ** 2
    c_p = two_pi2 * amp_p * sol.grid.integrate_r3(_positive_power(v64, p))
    energy = p * two_pi2 * um ** 2 * sol.grid.integrate_r3(w64 ** 2)
    cross = p * two_pi2 * amp_p1 * sol.grid.integrate_r3(_positive_power(v64, p + 1.0))
    return Diagnostics(
        p=p,
        u_max=um,
        eps_p=sol.eps_p,
        c_p=c_p,
        energy=energy,
        energy_crosscheck=cross,
        mass_check=p / um * c_p,
    )


def boundary_flux_mass(sol: RadialSolution) -> float:
    """int (u+)^p over the ball through the divergence theorem.

    Lap w = (u+)^p turns the ball integral into the boundary flux
    2 pi^2 w'(1); an independent route to c_p for cross-checking.
    """
    dw_edge = float(np.dot(_edge_rows(grid := sol.grid)[0], sol.w_scaled[-6:].astype(float)))
    return 2.0 * np.pi ** 2 * sol.u_max * dw_edge / grid.gp[-1]


_corrections: dict = {}


def _eta0_profile():
    ent = _corrections.get("eta0")
    if ent is None:
        ent = bubble.solve_eta0(bubble.default_correction_grid())
        _corrections["eta0"] = ent
    return ent


@dataclass(frozen=True)
class RescaledComparison:
    """Node samples of the rescaled profile against the limit profile.

    z_p = p (u(eps y) - u(0))/u(0) sampled at the grid nodes inside
    |y| <= y_max; d0, d1, d2 are the sup distances of z_p to Z, of
    p (z_p - Z) to eta0, and of p^2 (z_p - Z - eta0/p) to zero.
    """

    p: float
    y: np.ndarray
    z_p: np.ndarray
    z: np.ndarray
    eta0: np.ndarray
    d0: float
    d1: float
    d2: float


def rescaled_profiles(sol: RadialSolution, y_max: float = 5.0) -> RescaledComparison:
    eps = sol.eps_p
    if not y_max > 0.0:
        raise InvalidArgumentError(f"window must be positive, got {y_max}")
    if eps * y_max > sol.grid.r_max * (1.0 + 1e-12):
        raise InvalidArgumentError(
            f"rescaled window eps*y_max = {eps * y_max:.3e} exceeds the grid support"
        )
    mask = sol.grid.r <= eps * y_max * (1.0 + 1e-12)
    y = sol.grid.r[mask] / eps
    z_p = (sol.p * (sol.v[mask] - np.longdouble(1.0))).astype(float)
    z = bubble.PROFILE.z(y)
    eta = np.asarray(_eta0_profile().profile(y), dtype=float)
    first = z_p - z
    second = sol.p * first - eta
    return RescaledComparison(
        p=sol.p,
        y=y,
        z_p=z_p,
        z=z,
        eta0=eta,
        d0=float(np.max(np.abs(first))),
        d1=float(np.max(np.abs(second))),
        d2=float(np.max(np.abs(sol.p * second))),
    )


# ---------------------------------------------------------------------------
# continuation in the exponent


@dataclass(frozen=True)
class BranchRecord:
    """One converged exponent with its diagnostics."""

    p: float
    solution: RadialSolution
    diagnostics: Diagnostics
    identities: Optional[pohozaev.IdentityReport]
    rescaled: RescaledComparison

    def as_dict(self) -> dict:
        d = {
            "p": self.p,
            "u_max": self.diagnostics.u_max,
            "eps_p": self.diagnostics.eps_p,
            "C_p": self.diagnostics.c_p,
            "energy": self.diagnostics.energy,
            "mass_check": self.diagnostics.mass_check,
            "rescaled_distances": {
                "d0": self.rescaled.d0,
                "d1": self.rescaled.d1,
                "d2": self.rescaled.d2,
            },
        }
        if self.identities is not None:
            d["pohozaev_residuals"] = {
                "q_absolute": self.identities.q_absolute,
                "p_absolute": self.identities.p_absolute,
                "q_relative": self.identities.q_relative,
                "p_relative": self.identities.p_relative,
                "theta": self.identities.theta,
            }
        return d


@dataclass(frozen=True)
class Branch:
    """Continuation records, ordered by increasing exponent."""

    records: tuple

    @property
    def p_values(self) -> np.ndarray:
        return np.array([rec.p for rec in self.records])

    def __len__(self) -> int:
        return len(self.records)


def _make_record(sol: RadialSolution, with_identities: bool, theta: float) -> BranchRecord:
    diag = diagnostics(sol)
    ident = None
    if with_identities:
        ident = pohozaev.solution_identities(
            sol,
            np.zeros(4),
            theta,
            inner_scale=min(theta / 8.0, bubble.CORE_SCALE * sol.eps_p),
        )
    return BranchRecord(
        p=sol.p,
        solution=sol,
        diagnostics=diag,
        identities=ident,
        rescaled=rescaled_profiles(sol),
    )


def continuation(
    p_start: float = 10.0,
    p_end: float = 160.0,
    factor: float = 1.25,
    grid_size: int = DEFAULT_GRID_SIZE,
    with_identities: bool = True,
    identity_theta: float = 0.1,
) -> Branch:
    """Walk the branch from p_start to p_end with multiplicative steps.

    Each exponent is warm-started from the previous converged profile;
    the final step lands exactly on p_end.  A failed step triggers
    halving of the log step, and underflow of the step raises SolverError
    naming the last converged exponent.  The grid is rebuilt with deeper
    grading whenever the predicted concentration length halves.
    """
    p_start, p_end, factor = float(p_start), float(p_end), float(factor)
    if p_start < 2.0:
        raise InvalidArgumentError(f"p_start must be at least 2, got {p_start}")
    if p_end <= p_start:
        raise InvalidArgumentError("p_end must exceed p_start")
    if p_end > MAX_EXPONENT:
        raise InvalidArgumentError(
            f"p_end {p_end} exceeds the double-precision amplitude range ({MAX_EXPONENT:g})"
        )
    if factor <= 1.001:
        raise InvalidArgumentError("step factor must exceed 1.001")

    eps_design = _eps_guess(p_start)
    grid = solver_grid(eps_design, grid_size)
    sol = newton_solve(p_start, grid=grid)
    records = [_make_record(sol, with_identities, identity_theta)]
    history = [(p_start, sol.log_amplitude / (p_start - 1.0))]  # (p, ln u_max)

    p = p_start
    nominal = np.log(factor)
    step = nominal
    while p < p_end * (1.0 - 1e-12):
        target = min(p * np.exp(step), p_end)
        if target > p_end / (1.0 + 1e-9):
            target = p_end

        # secant extrapolation of ln u_max steers the amplitude guess;
        # the first step falls back to freezing u_max
        if len(history) >= 2:
            (pa, la), (pb, lb) = history[-2], history[-1]
            ln_umax = lb + (lb - la) / (pb - pa) * (target - pb)
        else:
            ln_umax = history[-1][1]
        lam0 = (target - 1.0) * ln_umax

        eps_pred = float(np.exp(-(np.log(target) + lam0) / 4.0))
        if eps_pred < 0.5 * eps_design:
            next_design = eps_pred
            next_grid = solver_grid(eps_pred, grid_size)
            v0 = CubicSpline(grid.r, sol.v.astype(float))(next_grid.r)
            w0 = CubicSpline(grid.r, sol.w_scaled.astype(float))(next_grid.r)
        else:
            next_design, next_grid = eps_design, grid
            v0, w0 = sol.v, sol.w_scaled

        try:
            sol_next = newton_solve(target, grid=next_grid, guess=(v0, w0, lam0))
        except SolverError as err:
            step *= 0.5
            if step < np.log(1.0005):
                raise SolverError(
                    f"continuation step underflow after p = {p:g}: {err}"
                ) from err
            continue
        sol = sol_next
        grid, eps_design = next_grid, next_design
        p = target
        records.append(_make_record(sol, with_identities, identity_theta))
        history.append((p, sol.log_amplitude / (p - 1.0)))
        step = min(nominal, 2.0 * step)

    return Branch(tuple(records))


# ---------------------------------------------------------------------------
# asymptotic fits along a branch


@dataclass(frozen=True)
class AsymptoticReport:
    """Fitted expansion constants of a branch against their predictions.

    c1 is the 1/p coefficient of u_max/sqrt(e) - 1 + ln p/(p-1); c2 the
    constant of ln eps_p + p/8.  mass_extrapolated is the 1/p-Richardson
    limit of p C_p (target 64 pi^2 sqrt(e)); mass_check_exponent the
    observed decay rate of the mass_check residual.
    """

    c1: float
    c1_predicted: float
    c2: float
    c2_predicted: float
    mass_extrapolated: float
    mass_target: float
    mass_check_exponent: float
    u_max_monotone: bool
    p_fit: np.ndarray

    @property
    def c1_relative_error(self) -> float:
        return abs(self.c1 - self.c1_predicted) / abs(self.c1_predicted)

    @property
    def c2_relative_error(self) -> float:
        return abs(self.c2 - self.c2_predicted) / abs(self.c2_predicted)


def asymptotic_report(branch: Branch) -> AsymptoticReport:
    """Extract expansion constants from a branch spanning a factor >= 8."""
    if len(branch) < 6:
        raise AccuracyError("too few continuation records to fit the expansion")
    ps = branch.p_values
    if ps.max() / ps.min() < 8.0 * (1.0 - 1e-9):
        raise AccuracyError(
            f"branch spans a factor {ps.max() / ps.min():.2f} in p; the fits need 8"
        )
    umax = np.array([rec.diagnostics.u_max for rec in branch.records])
    lam = np.array([rec.solution.log_amplitude for rec in branch.records])
    ln_eps = -(np.log(ps) + lam) / 4.0
    mass = np.array([rec.diagnostics.mass_check for rec in branch.records])
    pc = ps * np.array([rec.diagnostics.c_p for rec in branch.records])

    tail = ps >= ps.max() / 8.0 * (1.0 - 1e-9)
    if np.count_nonzero(tail) < 4:
        raise AccuracyError("too few records in the top factor-8 range of p")
    x = 1.0 / ps[tail]

    y1 = umax[tail] / SQRT_E - 1.0 + np.log(ps[tail]) / (ps[tail] - 1.0)
    c1 = float(np.linalg.lstsq(np.column_stack([x, x * x]), y1, rcond=None)[0][0])

    y2 = ln_eps[tail] + ps[tail] / 8.0
    c2 = float(
        np.linalg.lstsq(np.column_stack([np.ones_like(x), x]), y2, rcond=None)[0][0]
    )

    x1, x2 = 1.0 / ps[-1], 1.0 / ps[-2]
    mass_extrap = float((pc[-1] * x2 - pc[-2] * x1) / (x2 - x1))

    resid = np.abs(mass - MASS_LIMIT * (1.0 - 13.0 / (3.0 * ps)))
    keep = tail & (resid > 0.0)
    slope = np.polyfit(np.log(ps[keep]), np.log(resid[keep]), 1)[0]

    return AsymptoticReport(
        c1=c1,
        c1_predicted=C1_PREDICTED,
        c2=c2,
        c2_predicted=C2_PREDICTED,
        mass_extrapolated=mass_extrap,
        mass_target=ENERGY_LIMIT,
        mass_check_exponent=float(-slope),
        u_max_monotone=bool(np.all(np.diff(umax) < 0.0)),
        p_fit=ps[tail],
    )
