"""Quadrature and radial finite-difference plumbing shared by every module.

Everything here is dimension-specific to R^4.  The three quadrature
families are

* Gauss-Legendre line rules on a finite interval, plus composite rules
  on graded panels (used for endpoint log singularities),
* improper radial integrals int_0^inf r^3 f(r) dr computed through the
  algebraic substitution s = r/(c+r), and
* product rules on the unit 3-sphere in hyperspherical angles
  (psi, theta, phi) with surface density sin^2(psi) sin(theta).

The finite-difference side provides 4th-order stencils on radial grids
that are images of a uniform parameter grid under a smooth increasing
map r = g(t).  Mode-ell radial Laplacians

    D_ell u = u'' + (3/r) u' - ell(ell+2) u / r^2

are assembled as sparse matrices with the origin handled by even/odd
extension according to the parity of the mode:  a smooth mode-ell
function behaves like r^ell near r = 0, so its radial profile extends
to negative r with sign (-1)^ell.  For ell = 0 the origin row uses the
regularity limit (D_0 u)(0) = 4 u''(0); for ell >= 1 the mode profile
and its Laplacian vanish at r = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse

from .errors import AccuracyError, InvalidArgumentError

# Core scale of the concentration profile, sqrt(8*sqrt(6)).  The default
# map scale of the improper integral resolves the profile's core and
# tail with a single rule.
DEFAULT_MAP_SCALE = 384.0 ** 0.25

S3_AREA = 2.0 * np.pi ** 2


# ---------------------------------------------------------------------------
# line quadrature


@dataclass(frozen=True)
class Quadrature1D:
    """Nodes and weights for a rule on the interval (a, b)."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_rule(n: int, a: float, b: float) -> Quadrature1D:
    """Gauss-Legendre rule with n points mapped to (a, b)."""
    if n < 1:
        raise InvalidArgumentError(f"rule size must be >= 1, got {n}")
    if not a < b:
        raise InvalidArgumentError(f"need a < b, got ({a}, {b})")
    x, w = leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return Quadrature1D(mid + half * x, half * w, (a, b))


def panel_rule(breakpoints: Sequence[float], n: int) -> Quadrature1D:
    """Composite Gauss rule over consecutive panels between breakpoints."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
        raise InvalidArgumentError("breakpoints must be strictly increasing")
    nodes = []
    weights = []
    for lo, hi in zip(bp[:-1], bp[1:]):
        q = gauss_rule(n, lo, hi)
        nodes.append(q.nodes)
        weights.append(q.weights)
    return Quadrature1D(
        np.concatenate(nodes), np.concatenate(weights), (bp[0], bp[-1])
    )


def graded_breakpoints(a: float, b: float, levels: int = 40) -> np.ndarray:
    """Panel breakpoints on (a, b) geometrically refined toward both ends.

    Panels shrink by factors of two down to (b-a)*2^-levels at each
    endpoint, which resolves endpoint log singularities to near machine
    precision with a fixed-order panel rule.
    """
    # fractions 2^-levels .. 1/2 of the interval, measured from each end;
    # the half-way fraction appears once (from the left sequence).
    frac = np.array([0.5 ** k for k in range(levels, 0, -1)])
    left = a + (b - a) * frac
    right = (b - (b - a) * frac)[::-1][1:]
    return np.concatenate(([a], left, right, [b]))


def improper_radial_integral(
    f: Callable[[np.ndarray], np.ndarray],
    map_scale: float = DEFAULT_MAP_SCALE,
    panel_order: int = 16,
    levels: int = 40,
    rtol: float = 1e-10,
    check: bool = True,
) -> float:
    """Integral int_0^inf r^3 f(r) dr via the map s = r/(c+r).

    The substitution r = c s/(1-s) sends (0, inf) to (0, 1); the rule
    is a composite Gauss rule on panels graded toward both endpoints so
    that integrands with ln(r) factors at either end converge cleanly.
    Multiplying the result by 2 pi^2 gives the R^4 integral of the
    radial extension of f.

    Raises AccuracyError when refining the panel order moves the value
    by more than rtol in relative terms (the drift check can be turned
    off with check=False once an integrand family is trusted).
    """
    if map_scale <= 0:
        raise InvalidArgumentError("map_scale must be positive")
    c = float(map_scale)

    def mapped(s: np.ndarray) -> np.ndarray:
        r = c * s / (1.0 - s)
        jac = c / (1.0 - s) ** 2
        return r ** 3 * np.asarray(f(r)) * jac

    bp = graded_breakpoints(0.0, 1.0, levels=levels)
    value = panel_rule(bp, panel_order).integrate(mapped)
    if check:
        refined = panel_rule(bp, panel_order + 8).integrate(mapped)
        scale = max(abs(value), abs(refined), 1e-300)
        if abs(refined - value) > rtol * scale:
            raise AccuracyError(
                "improper radial integral drifts under refinement: "
                f"{value!r} -> {refined!r}"
            )
        value = refined
    return float(value)


# ---------------------------------------------------------------------------
# 3-sphere product rule


@dataclass(frozen=True)
class SphereRuleS3:
    """Quadrature on the unit 3-sphere: sum(w_k g(nu_k)) ~ int_{S^3} g."""

    points: np.ndarray  # (m, 4) unit vectors
    weights: np.ndarray  # (m,) positive, summing to 2 pi^2
    order: int  # polynomial degree integrated exactly


def sphere_rule(n: int) -> SphereRuleS3:
    """Product rule with ~n points per angle, exact to degree ~2n-1.

    Hyperspherical coordinates with density sin^2(psi) sin(theta):
    the psi factor uses the Gauss-Chebyshev rule of the second kind
    (exact for polynomials in cos psi against the sin^2 weight), the
    theta factor plain Gauss-Legendre in cos theta, and the periodic
    phi factor a uniform rule, exact for trigonometric polynomials.
    """
    if n < 2:
        raise InvalidArgumentError("need at least 2 points per angle")
    k = np.arange(1, n + 1)
    psi = k * np.pi / (n + 1.0)
    t = np.cos(psi)
    w_psi = (np.pi / (n + 1.0)) * np.sin(psi) ** 2

    u, w_u = leggauss(n)

    m_phi = 2 * n
    phi = 2.0 * np.pi * np.arange(m_phi) / m_phi
    w_phi = np.full(m_phi, 2.0 * np.pi / m_phi)

    tt, uu, pp = np.meshgrid(t, u, phi, indexing="ij")
    sp = np.sqrt(1.0 - tt ** 2)
    st = np.sqrt(1.0 - uu ** 2)
    pts = np.stack(
        [tt, sp * uu, sp * st * np.cos(pp), sp * st * np.sin(pp)], axis=-1
    ).reshape(-1, 4)
    wts = (
        w_psi[:, None, None] * w_u[None, :, None] * w_phi[None, None, :]
    ).reshape(-1)
    return SphereRuleS3(pts, wts, order=2 * n - 1)


def sphere_surface_integral(
    g: Callable[[np.ndarray], np.ndarray],
    center: np.ndarray,
    radius: float,
    rule: SphereRuleS3,
) -> float:
    """Surface integral of g over the sphere of given center and radius.

    g receives an (m, 4) array of points and returns (m,) values; the
    weights carry the radius^3 surface scaling.
    """
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    center = np.asarray(center, dtype=float)
    pts = center[None, :] + radius * rule.points
    return float(radius ** 3 * np.dot(rule.weights, np.asarray(g(pts))))


# ---------------------------------------------------------------------------
# radial grids and 4th-order stencils


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights at point z on nodes x for derivatives 0..m.

    Classic recursion; returns an (m+1, len(x)) array whose row k gives
    the weights of the k-th derivative.
    """
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(float)
    nn = len(x)
    c = np.zeros((m + 1, nn), dtype=x.dtype)
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, nn):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


@dataclass
class RadialGrid:
    """Radial nodes r_i = g(t_i) on a uniform parameter grid t in [0, 1].

    The map g must be smooth, increasing, odd-extendable through t = 0
    (g(-t) = -g(t)), with g(0) = 0; this is what lets parity extensions
    of radial mode profiles work directly in the t variable.
    """

    r: np.ndarray
    gp: np.ndarray  # g'(t_i)
    gpp: np.ndarray  # g''(t_i)
    description: str = "uniform"
    # optional (g, g', g'') callables evaluating the map in the dtype
    # of their argument; lets extended-precision paths rebuild nodes
    # without the float64 rounding baked into the sampled arrays
    map_fns: tuple | None = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.r = np.asarray(self.r, dtype=float)
        if self.r[0] != 0.0:
            raise InvalidArgumentError("grid must start at r = 0 exactly")
        if np.any(np.diff(self.r) <= 0):
            raise InvalidArgumentError("grid nodes must increase strictly")

    @property
    def n(self) -> int:
        return len(self.r) - 1

    @property
    def dt(self) -> float:
        return 1.0 / self.n

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @classmethod
    def uniform(cls, r_max: float, n: int) -> "RadialGrid":
        t = np.linspace(0.0, 1.0, n + 1)
        return cls(
            r=r_max * t,
            gp=np.full(n + 1, float(r_max)),
            gpp=np.zeros(n + 1),
            description=f"uniform[0,{r_max}] n={n}",
            map_fns=(
                lambda t: r_max * t,
                lambda t: r_max * np.ones_like(t),
                lambda t: np.zeros_like(t),
            ),
        )

    @classmethod
    def sinh_graded(cls, r_max: float, n: int, beta: float) -> "RadialGrid":
        """Nodes r = r_max sinh(beta t)/sinh(beta): spacing grows ~e^beta.

        The smallest spacing near the origin is about
        r_max * beta / (sinh(beta) * n), so beta controls how deep the
        grid resolves below the outer scale.
        """
        if beta <= 0:
            raise InvalidArgumentError("beta must be positive")
        t = np.linspace(0.0, 1.0, n + 1)
        s = np.sinh(beta)
        r = r_max * np.sinh(beta * t) / s
        r[-1] = r_max  # sinh(beta)/sinh(beta) rounds to 1, keep it exact
        return cls(
            r=r,
            gp=r_max * beta * np.cosh(beta * t) / s,
            gpp=r_max * beta ** 2 * np.sinh(beta * t) / s,
            description=f"sinh[0,{r_max}] n={n} beta={beta:.3g}",
            map_fns=(
                lambda t: r_max * np.sinh(beta * t) / np.sinh(t.dtype.type(beta)),
                lambda t: r_max
                * beta
                * np.cosh(beta * t)
                / np.sinh(t.dtype.type(beta)),
                lambda t: r_max
                * beta ** 2
                * np.sinh(beta * t)
                / np.sinh(t.dtype.type(beta)),
            ),
        )

    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.r)))

    def integrate_r3(self, values: np.ndarray) -> float:
        """int_0^{r_max} v(r) r^3 dr by 4th-order composite rule in t."""
        w = self._cache.get("simpson")
        if w is None:
            w = _simpson_weights(self.n) * self.dt
            self._cache["simpson"] = w
        integrand = np.asarray(values) * self.r ** 3 * self.gp
        return float(np.dot(w, integrand))


def _simpson_weights(n: int) -> np.ndarray:
    """Composite Simpson weights on n+1 uniform unit-spaced nodes.

    For odd n the last three intervals use the 3/8 rule so the order
    stays 4 throughout.
    """
    if n < 4:
        raise InvalidArgumentError("need at least 5 nodes to integrate")
    w = np.zeros(n + 1)
    m = n if n % 2 == 0 else n - 3
    w[0:m + 1:2] += 2.0 / 3.0
    w[1:m:2] += 4.0 / 3.0
    w[0] -= 1.0 / 3.0
    w[m] -= 1.0 / 3.0
    if m != n:
        w[m:] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w


@dataclass
class RadialField:
    """Values of a mode-ell radial profile sampled on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray
    ell: int = 0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.r.shape:
            raise InvalidArgumentError("field length does not match grid")


def _stencil_entries(n: int, order: int, parity: int, dtype=np.float64):
    """Row/col/value triplets of d^order/dt^order on n+1 uniform nodes.

    parity = +1 (even) or -1 (odd) folds ghost nodes t < 0 back onto
    the grid; rows near t = 1 use one-sided 6-point stencils so the
    whole operator is 4th-order accurate.  Weights are computed in the
    requested dtype (extended precision matters when two applications
    are composed: float64 weight rounding, amplified by 1/h^2, sets a
    floor the truncation error is otherwise below).
    """
    width = 5
    h = dtype(1.0) / n
    half = width // 2
    rows, cols, vals = [], [], []

    def add(i: int, stencil_nodes: np.ndarray, at) -> None:
        wts = fornberg_weights(at, stencil_nodes, order)[order]
        for node, wt in zip(stencil_nodes, wts):
            j = int(round(float(node / h)))
            if j < 0:
                rows.append(i)
                cols.append(-j)
                vals.append(parity * wt)
            else:
                rows.append(i)
                cols.append(j)
                vals.append(wt)

    for i in range(n + 1):
        if i > n - half:
            # one-sided 6-point stencil keeps 4th order at the outer edge
            nodes = np.arange(n - width, n + 1).astype(dtype) * h
        else:
            nodes = np.arange(i - half, i + half + 1).astype(dtype) * h
        add(i, nodes, i * h)

    return (
        np.array(rows, dtype=int),
        np.array(cols, dtype=int),
        np.array(vals, dtype=dtype),
    )


def _parameter_derivative_matrix(
    n: int, order: int, parity: int
) -> sparse.csr_matrix:
    rows, cols, vals = _stencil_entries(n, order, parity)
    mat = sparse.coo_matrix((vals, (rows, cols)), shape=(n + 1, n + 1))
    return mat.tocsr()


def parameter_derivative_matrix(
    grid: RadialGrid, order: int, parity: int
) -> sparse.csr_matrix:
    key = ("D", order, parity)
    mat = grid._cache.get(key)
    if mat is None:
        mat = _parameter_derivative_matrix(grid.n, order, parity)
        grid._cache[key] = mat
    return mat


def mode_laplacian_matrix(grid: RadialGrid, ell: int) -> sparse.csr_matrix:
    """Sparse matrix of D_ell = d^2/dr^2 + (3/r) d/dr - ell(ell+2)/r^2.

    Derivatives are taken in the t parameter and converted through the
    grid map; the origin row implements the regularity limit (4 u''(0)
    for ell = 0, the value 0 for ell >= 1).
    """
    if ell < 0:
        raise InvalidArgumentError("mode index must be >= 0")
    key = ("L", ell)
    cached = grid._cache.get(key)
    if cached is not None:
        return cached

    parity = 1 if ell % 2 == 0 else -1
    d1 = parameter_derivative_matrix(grid, 1, parity)
    d2 = parameter_derivative_matrix(grid, 2, parity)
    r, gp, gpp = grid.r, grid.gp, grid.gpp

    with np.errstate(divide="ignore"):
        inv_r = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
    a2 = 1.0 / gp ** 2
    a1 = 3.0 * inv_r / gp - gpp / gp ** 3

    lap = sparse.diags(a2) @ d2 + sparse.diags(a1) @ d1
    if ell > 0:
        lap = lap - sparse.diags(ell * (ell + 2) * inv_r ** 2)
    lap = lap.tolil()
    if ell == 0:
        # Regularity limit 4 u''(0), plus a folded-D6 term sized so the
        # row's h^4 truncation constant continues the interior rows'
        # origin limit.  Without it the error field steps at r = 0 and
        # a composed second application divides the step by h^2.
        h = 1.0 / grid.n
        row0 = 4.0 * a2[0] * d2[0, :].toarray().ravel()
        row0[:4] -= (1.0 / 15.0) * (a2[0] / h ** 2) * np.array(
            [-20.0, 30.0, -12.0, 2.0]
        )
        lap[0, :] = row0
    else:
        lap[0, :] = 0.0
    lap = lap.tocsr()
    grid._cache[key] = lap
    return lap


def _extended_map(grid: RadialGrid):
    """Longdouble (r, g', g'') arrays, rebuilt from the map when known."""
    cached = grid._cache.get("hd_map")
    if cached is None:
        ld = np.longdouble
        if grid.map_fns is not None:
            t = np.arange(grid.n + 1, dtype=ld) / grid.n
            g, gp, gpp = grid.map_fns
            cached = (g(t), gp(t), gpp(t))
        else:
            cached = (
                grid.r.astype(ld),
                grid.gp.astype(ld),
                grid.gpp.astype(ld),
            )
        grid._cache["hd_map"] = cached
    return cached


def extended_nodes(grid: RadialGrid) -> np.ndarray:
    """Longdouble radii consistent with the extended-precision stencils."""
    return _extended_map(grid)[0]


def mode_laplacian_apply_extended(
    grid: RadialGrid, values: np.ndarray, ell: int = 0
) -> np.ndarray:
    """Apply D_ell in extended precision; returns a longdouble array.

    Same stencils and origin handling as mode_laplacian_matrix, with
    weights, coefficients, accumulation, and the grid map itself all
    in longdouble.  Used where two applications are composed (discrete
    biharmonic residual checks): in float64 the node values carry a
    jagged ~1e-16 r relative rounding, which the 1/h^4 amplification
    of the composition turns into a grid-independent floor near 1e-5.
    Sample the profile at extended_nodes(grid) for full benefit.
    """
    ld = np.longdouble
    if ell < 0:
        raise InvalidArgumentError("mode index must be >= 0")
    parity = 1 if ell % 2 == 0 else -1
    key = ("hd", parity)
    ent = grid._cache.get(key)
    if ent is None:
        ent = {
            1: _stencil_entries(grid.n, 1, parity, dtype=ld),
            2: _stencil_entries(grid.n, 2, parity, dtype=ld),
        }
        grid._cache[key] = ent

    u = np.asarray(values).astype(ld)
    deriv = {}
    for order, (rows, cols, vals) in ent.items():
        acc = np.zeros(grid.n + 1, dtype=ld)
        np.add.at(acc, rows, vals * u[cols])
        deriv[order] = acc

    r, gp, gpp = _extended_map(grid)
    inv_r = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), ld(0.0))
    a2 = 1.0 / gp ** 2
    a1 = 3.0 * inv_r / gp - gpp / gp ** 3

    out = a2 * deriv[2] + a1 * deriv[1]
    if ell > 0:
        out = out - ell * (ell + 2) * inv_r ** 2 * u
        out[0] = 0.0
    else:
        # same truncation-matched origin row as mode_laplacian_matrix
        h = ld(1) / ld(grid.n)
        d6 = (-20 * u[0] + 30 * u[1] - 12 * u[2] + 2 * u[3]) / h ** 6
        out[0] = 4.0 * a2[0] * deriv[2][0] - (ld(1) / 15) * a2[0] * h ** 4 * d6
    return out


def radial_laplacian(u: RadialField, ell: int | None = None) -> RadialField:
    """Apply the mode-ell radial Laplacian to a sampled profile."""
    ell = u.ell if ell is None else ell
    if u.grid.n < 6:
        raise InvalidArgumentError("grid too small for 4th-order stencils")
    lap = mode_laplacian_matrix(u.grid, ell)
    return RadialField(u.grid, lap @ u.values, ell)


# ---------------------------------------------------------------------------
# generic finite differences in R^4 (used on smooth closed-form functions)

FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
FD4_D1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
FD4_D2_CENTER = -30.0 / 12.0
FD4_D2 = np.array([-1.0, 16.0, 16.0, -1.0]) / 12.0


def fd_directional(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    direction: np.ndarray,
    h: float,
) -> np.ndarray:
    """4th-order central first derivative of f along a unit direction.

    x may be a batch (m, 4); direction is broadcast against it.
    """
    x = np.asarray(x, dtype=float)
    acc = None
    for off, wt in zip(FD4_OFFSETS, FD4_D1):
        term = wt * np.asarray(f(x + (off * h) * direction))
        acc = term if acc is None else acc + term
    return acc / h


def fd_gradient(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float
) -> np.ndarray:
    """4th-order gradient; returns shape x.shape (batched in the lead axis)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        out[:, i] = fd_directional(f, x, e, h)
    return out if out.shape[0] > 1 else out[0]


def fd_laplacian(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float
) -> np.ndarray:
    """4th-order Laplacian of f: sum of 1D second differences."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    center = np.asarray(f(x))
    acc = 4.0 * FD4_D2_CENTER * center
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        for off, wt in zip(FD4_OFFSETS, FD4_D2):
            acc = acc + wt * np.asarray(f(x + (off * h) * e))
    out = acc / h ** 2
    return out if out.shape[0] > 1 else out[0]
