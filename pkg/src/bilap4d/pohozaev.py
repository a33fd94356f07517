"""Surface quadratic forms on small spheres and their identity checks.

Two bilinear forms drive everything here.  For traces of u and v on the
sphere |x - c| = theta, with D the Laplacian and d_nu the outward normal
derivative,

    P(u, v)   = int [ -theta Du Dv
                      - theta (d_nu Du d_nu v + d_nu Dv d_nu u)
                      + Du d_nu<x-c, grad v> + Dv d_nu<x-c, grad u> ]
    Q_i(u, v) = int [ Du Dv nu_i + d_nu Du d_i v + d_nu Dv d_i u
                      - Du d_nu(d_i v) - Dv d_nu(d_i u) ].

When u and v are biharmonic in a punctured ball around c both values are
independent of theta, so they read off coefficients of singular
expansions; applied to solutions of the clamped problem they produce
exact integral identities whose residuals measure solver quality.

All traces are analytic.  Fields derived from the ball's Green function
are functions F(d2, q) of the two rotation invariants

    d2 = |x - c|^2,    q = (1 - |c|^2)(1 - |x|^2),

differentiated by hand through third order; radial profiles about the
origin go through the corresponding radial chain rule.  The only finite
differences left are center-slot derivatives of the Green function,
taken with steps scaled to the distance from the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import greenball
from .errors import InvalidArgumentError
from .numerics import panel_rule, sphere_rule

EIGHT_PI_SQ = 8.0 * np.pi ** 2

# ---------------------------------------------------------------------------
# pair potentials: scalar functions of d2 = |x-c|^2, q = (1-|c|^2)(1-|x|^2)


@dataclass(frozen=True)
class PairPartials:
    """Value and partial derivatives of F(d2, q) through third order."""

    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f11: np.ndarray
    f12: np.ndarray
    f22: np.ndarray
    f111: np.ndarray
    f112: np.ndarray
    f122: np.ndarray
    f222: np.ndarray


def _green_partials(d2, q):
    """Green function of the clamped bilaplacian on the unit ball.

    With A = d2 + q every partial is rational in (d2, A) apart from the
    logarithmic pair, so the whole stack is exact to rounding.
    """
    A = d2 + q
    pref = 1.0 / EIGHT_PI_SQ
    return PairPartials(
        f=pref * (0.5 * np.log1p(q / d2) + 0.5 * d2 / A - 0.5),
        f1=pref * (0.5 / A - 0.5 / d2 + 0.5 * q / A ** 2),
        f2=pref * (0.5 * q / A ** 2),
        f11=pref * (-0.5 / A ** 2 + 0.5 / d2 ** 2 - q / A ** 3),
        f12=pref * (-q / A ** 3),
        f22=pref * (0.5 * (d2 - q) / A ** 3),
        f111=pref * (1.0 / A ** 3 - 1.0 / d2 ** 3 + 3.0 * q / A ** 4),
        f112=pref * (3.0 * q / A ** 4),
        f122=pref * ((2.0 * q - d2) / A ** 4),
        f222=pref * ((q - 2.0 * d2) / A ** 4),
    )


def _log_kernel_partials(d2, q):
    """Free-space kernel -ln|x-c| / (8 pi^2); no q dependence."""
    z = np.zeros_like(d2)
    pref = 1.0 / EIGHT_PI_SQ
    return PairPartials(
        f=pref * (-0.5) * np.log(d2),
        f1=pref * (-0.5) / d2,
        f2=z,
        f11=pref * 0.5 / d2 ** 2,
        f12=z,
        f22=z,
        f111=pref * (-1.0) / d2 ** 3,
        f112=z,
        f122=z,
        f222=z,
    )


def _distance_sq_partials(d2, q):
    """Plain |x - c|^2, an exactly integrable sanity field."""
    z = np.zeros_like(d2)
    return PairPartials(np.array(d2, copy=True), np.ones_like(d2), z, z, z, z, z, z, z, z)


# ---------------------------------------------------------------------------
# trace fields: anything with .stack(nodes) -> FieldStack


@dataclass(frozen=True)
class FieldStack:
    """Pointwise derivative data of a scalar field on a batch of nodes."""

    value: np.ndarray     # (N,)
    grad: np.ndarray      # (N, 4)
    hess: np.ndarray      # (N, 4, 4)
    lap: np.ndarray       # (N,)
    grad_lap: np.ndarray  # (N, 4)


class PairInvariantField:
    """Field x -> F(|x-c|^2, (1-|c|^2)(1-|x|^2)) with an analytic stack.

    The chain rule runs over g1 = grad d2 = 2(x-c) and
    g2 = grad q = -2(1-|c|^2) x, whose second derivatives are constant
    multiples of the identity; third derivatives vanish, which keeps the
    gradient-of-Laplacian formula short.
    """

    def __init__(self, partials: Callable, center):
        center = np.asarray(center, dtype=float)
        if center.shape != (4,):
            raise InvalidArgumentError(f"center must be a 4-vector, got shape {center.shape}")
        self.center = center
        self.partials = partials

    def stack(self, nodes) -> FieldStack:
        X = np.asarray(nodes, dtype=float)
        c = self.center
        kappa = 1.0 - float(np.dot(c, c))
        diff = X - c
        d2 = np.einsum("ni,ni->n", diff, diff)
        q = kappa * (1.0 - np.einsum("ni,ni->n", X, X))
        pp = self.partials(d2, q)
        g1 = 2.0 * diff
        g2 = -2.0 * kappa * X

        grad = pp.f1[:, None] * g1 + pp.f2[:, None] * g2

        eye = np.eye(4)
        hess = (
            pp.f11[:, None, None] * g1[:, :, None] * g1[:, None, :]
            + pp.f12[:, None, None]
            * (g1[:, :, None] * g2[:, None, :] + g2[:, :, None] * g1[:, None, :])
            + pp.f22[:, None, None] * g2[:, :, None] * g2[:, None, :]
            + (2.0 * pp.f1 - 2.0 * kappa * pp.f2)[:, None, None] * eye
        )

        n1 = 4.0 * d2                                 # |g1|^2
        n12 = np.einsum("ni,ni->n", g1, g2)           # g1 . g2
        n2 = np.einsum("ni,ni->n", g2, g2)            # |g2|^2
        lap = (
            pp.f11 * n1 + 2.0 * pp.f12 * n12 + pp.f22 * n2
            + 8.0 * pp.f1 - 8.0 * kappa * pp.f2
        )

        dn1 = 4.0 * g1
        dn12 = -4.0 * kappa * (2.0 * X - c)
        dn2 = 8.0 * kappa ** 2 * X
        grad_lap = (
            (pp.f111[:, None] * g1 + pp.f112[:, None] * g2) * n1[:, None]
            + pp.f11[:, None] * dn1
            + 2.0 * (pp.f112[:, None] * g1 + pp.f122[:, None] * g2) * n12[:, None]
            + 2.0 * pp.f12[:, None] * dn12
            + (pp.f122[:, None] * g1 + pp.f222[:, None] * g2) * n2[:, None]
            + pp.f22[:, None] * dn2
            + 8.0 * (pp.f11[:, None] * g1 + pp.f12[:, None] * g2)
            - 8.0 * kappa * (pp.f12[:, None] * g1 + pp.f22[:, None] * g2)
        )
        return FieldStack(pp.f, grad, hess, lap, grad_lap)


def green_field(center) -> PairInvariantField:
    """Green function of the clamped problem with its center pinned."""
    c = np.asarray(center, dtype=float)
    if c.shape != (4,) or np.dot(c, c) >= 1.0:
        raise InvalidArgumentError("green_field needs an interior 4-vector center")
    return PairInvariantField(_green_partials, c)


def log_kernel_field(center) -> PairInvariantField:
    """Free-space kernel -ln|x-c| / (8 pi^2) as a trace field."""
    return PairInvariantField(_log_kernel_partials, center)


def distance_sq_field(center) -> PairInvariantField:
    """|x - c|^2; every surface form built from it vanishes."""
    return PairInvariantField(_distance_sq_partials, center)


class CombinationField:
    """Fixed linear combination of fields, stacked term by term."""

    def __init__(self, fields, coefficients):
        if len(fields) != len(coefficients) or not fields:
            raise InvalidArgumentError("need matching non-empty fields and coefficients")
        self.fields = list(fields)
        self.coefficients = [float(c) for c in coefficients]

    def stack(self, nodes) -> FieldStack:
        stacks = [f.stack(nodes) for f in self.fields]

        def mix(attr):
            return sum(c * getattr(s, attr) for c, s in zip(self.coefficients, stacks))

        return FieldStack(mix("value"), mix("grad"), mix("hess"), mix("lap"), mix("grad_lap"))


_FD_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FD_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def green_center_derivative_field(center, axis: int) -> CombinationField:
    """Center-slot derivative of the Green function as a field of x.

    Four analytically stacked fields with shifted centers are combined by
    a 4th-order difference; the step scales with the distance from the
    center to the boundary, so the trace error stays near rounding level.
    """
    c = np.asarray(center, dtype=float)
    if not 0 <= axis < 4:
        raise InvalidArgumentError(f"axis must be in 0..3, got {axis}")
    h = 1e-3 * (1.0 - float(np.linalg.norm(c)))
    fields, coefs = [], []
    for off, wgt in zip(_FD_OFFSETS, _FD_WEIGHTS):
        shifted = c.copy()
        shifted[axis] += off * h
        fields.append(green_field(shifted))
        coefs.append(wgt / h)
    return CombinationField(fields, coefs)


# ---------------------------------------------------------------------------
# radial fields about the origin


@dataclass(frozen=True)
class RadialProfile:
    """Callable bundle for a smooth radial function about the origin.

    u, du, d2u, d3u are the profile and its radial derivatives; w is the
    Laplacian profile with dw, d2w its radial derivatives.  All callables
    must accept numpy arrays.  d3u and d2w may be omitted when no
    directional-derivative traces are requested.
    """

    u: Callable
    du: Callable
    d2u: Callable
    w: Callable
    dw: Callable
    d3u: Optional[Callable] = None
    d2w: Optional[Callable] = None


def _radii(nodes):
    X = np.asarray(nodes, dtype=float)
    r = np.sqrt(np.einsum("ni,ni->n", X, X))
    if np.any(r <= 0.0):
        raise InvalidArgumentError("radial trace nodes must avoid the origin")
    return X, r


class ProfileField:
    """Radial field about the origin, traced via the radial chain rule."""

    def __init__(self, profile: RadialProfile):
        self.profile = profile

    def stack(self, nodes) -> FieldStack:
        X, r = _radii(nodes)
        xh = X / r[:, None]
        pf = self.profile
        u, du, d2u = pf.u(r), pf.du(r), pf.d2u(r)
        w, dw = pf.w(r), pf.dw(r)

        b = du / r
        hess = (
            (d2u - b)[:, None, None] * xh[:, :, None] * xh[:, None, :]
            + b[:, None, None] * np.eye(4)
        )
        return FieldStack(u, du[:, None] * xh, hess, w, dw[:, None] * xh)


class AxisDerivativeField:
    """Cartesian derivative of a radial field, traced analytically.

    For v = d_a u with u radial the stack needs third radial derivatives
    of u and second radial derivatives of the Laplacian profile.
    """

    def __init__(self, profile: RadialProfile, axis: int = 0):
        if profile.d3u is None or profile.d2w is None:
            raise InvalidArgumentError("directional traces need d3u and d2w in the profile")
        if not 0 <= axis < 4:
            raise InvalidArgumentError(f"axis must be in 0..3, got {axis}")
        self.profile = profile
        self.axis = axis

    def stack(self, nodes) -> FieldStack:
        X, r = _radii(nodes)
        xh = X / r[:, None]
        a = self.axis
        pf = self.profile
        du, d2u, d3u = pf.du(r), pf.d2u(r), pf.d3u(r)
        dw, d2w = pf.dw(r), pf.d2w(r)

        m = xh[:, a]
        b = du / r
        A = d2u - b
        Ap = d3u - A / r
        c2 = A / r

        value = du * m
        grad = (A * m)[:, None] * xh
        grad[:, a] += b

        outer = xh[:, :, None] * xh[:, None, :]
        hess = (Ap * m)[:, None, None] * outer
        hess += (c2 * m)[:, None, None] * np.eye(4)
        hess[:, :, a] += c2[:, None] * xh
        hess[:, a, :] += c2[:, None] * xh
        hess -= (2.0 * c2 * m)[:, None, None] * outer

        lap = dw * m
        grad_lap = ((d2w - dw / r) * m)[:, None] * xh
        grad_lap[:, a] += dw / r
        return FieldStack(value, grad, hess, lap, grad_lap)


def scaling_profile(profile: RadialProfile, shift: float) -> RadialProfile:
    """Profile of r u'(r) + shift u(r), the dilation generator plus a
    multiple of u.  The result supports plain traces only (no d3u/d2w)."""
    pf = profile
    if pf.d3u is None or pf.d2w is None:
        raise InvalidArgumentError("scaling_profile needs d3u and d2w on the input profile")
    s = float(shift)
    return RadialProfile(
        u=lambda r: r * pf.du(r) + s * pf.u(r),
        du=lambda r: r * pf.d2u(r) + (1.0 + s) * pf.du(r),
        d2u=lambda r: r * pf.d3u(r) + (2.0 + s) * pf.d2u(r),
        w=lambda r: r * pf.dw(r) + (2.0 + s) * pf.w(r),
        dw=lambda r: r * pf.d2w(r) + (3.0 + s) * pf.dw(r),
    )


# ---------------------------------------------------------------------------
# sphere rules carrying a nested coarse set for error estimates


@dataclass(frozen=True)
class TraceRule:
    """Unit-sphere nodes and weights plus a coarser companion set.

    Weights sum to the measure of the unit 3-sphere, 2 pi^2; the coarse
    set feeds the a posteriori quadrature error estimate of any form
    value built from traces on this rule.
    """

    points: np.ndarray
    weights: np.ndarray
    coarse_points: np.ndarray
    coarse_weights: np.ndarray


def product_trace_rule(n: int = 22, n_coarse: Optional[int] = None) -> TraceRule:
    """Full product rule on the 3-sphere; works for any integrand."""
    fine = sphere_rule(n)
    coarse = sphere_rule(n_coarse if n_coarse is not None else max(8, n - 6))
    return TraceRule(fine.points, fine.weights, coarse.points, coarse.weights)


def meridian_trace_rule(n: int = 14, refine_levels: int = 9) -> TraceRule:
    """Axisymmetric rule with nodes on the meridian (cos psi, sin psi, 0, 0).

    Each node carries the transverse 2-sphere factor 4 pi sin^2 psi, so
    the rule is valid only for integrands symmetric about the e1 axis.
    Panels refine geometrically toward psi = pi, where a sphere through
    the origin sees the concentrated part of a solution profile.
    """
    width = 0.4
    breakpoints = list(np.linspace(0.0, np.pi - width, 13))
    for _ in range(refine_levels):
        width *= 0.5
        breakpoints.append(np.pi - width)
    breakpoints.append(np.pi)
    bks = np.array(breakpoints)

    def build(m):
        rule = panel_rule(bks, m)
        psi = rule.nodes
        pts = np.zeros((psi.size, 4))
        pts[:, 0] = np.cos(psi)
        pts[:, 1] = np.sin(psi)
        return pts, 4.0 * np.pi * np.sin(psi) ** 2 * rule.weights

    fine_pts, fine_w = build(n)
    coarse_pts, coarse_w = build(max(4, n - 4))
    return TraceRule(fine_pts, fine_w, coarse_pts, coarse_w)


def _axis_aligned(center) -> bool:
    c = np.asarray(center, dtype=float)
    return float(np.max(np.abs(c[1:]))) < 1e-14


# ---------------------------------------------------------------------------
# boundary traces and the two forms


@dataclass(frozen=True)
class BoundaryTrace:
    """Surface derivative data of one field on the sphere |x - c| = theta.

    weights include the theta^3 surface factor.  The coarse attribute
    holds the same construction on the rule's companion node set and
    feeds quadrature error estimates; it is None on the coarse copy
    itself.
    """

    center: np.ndarray
    theta: float
    normals: np.ndarray
    weights: np.ndarray
    value: np.ndarray
    grad: np.ndarray
    lap: np.ndarray
    dnu: np.ndarray
    dnu_lap: np.ndarray
    hess_nu: np.ndarray
    nu_hess_nu: np.ndarray
    coarse: "Optional[BoundaryTrace]" = None


def boundary_trace(field, center, theta: float, rule: TraceRule) -> BoundaryTrace:
    """Evaluate a field's derivative stack on a sphere and contract with
    the normal everywhere the forms need it."""
    c = np.asarray(center, dtype=float)
    if c.shape != (4,):
        raise InvalidArgumentError("center must be a 4-vector")
    if not theta > 0.0:
        raise InvalidArgumentError(f"radius must be positive, got {theta}")

    def build(points, wts, coarse):
        nodes = c[None, :] + theta * points
        st = field.stack(nodes)
        dnu = np.einsum("ni,ni->n", st.grad, points)
        hess_nu = np.einsum("nij,nj->ni", st.hess, points)
        return BoundaryTrace(
            center=c,
            theta=float(theta),
            normals=points,
            weights=wts * theta ** 3,
            value=st.value,
            grad=st.grad,
            lap=st.lap,
            dnu=dnu,
            dnu_lap=np.einsum("ni,ni->n", st.grad_lap, points),
            hess_nu=hess_nu,
            nu_hess_nu=np.einsum("ni,ni->n", hess_nu, points),
            coarse=coarse,
        )

    coarse = build(rule.coarse_points, rule.coarse_weights, None)
    return build(rule.points, rule.weights, coarse)


@dataclass(frozen=True)
class FormValue:
    """One surface form evaluation with its quadrature error estimate."""

    value: float
    theta: float
    quad_error: float


def _require_aligned(tu: BoundaryTrace, tv: BoundaryTrace):
    if (
        tu.normals.shape != tv.normals.shape
        or tu.theta != tv.theta
        or not np.array_equal(tu.center, tv.center)
        or not np.array_equal(tu.normals, tv.normals)
    ):
        raise InvalidArgumentError("traces were built on different spheres or rules")


def _p_integrand(tu: BoundaryTrace, tv: BoundaryTrace) -> np.ndarray:
    th = tu.theta
    # d_nu<x-c, grad v> = d_nu v + theta * nu.Hv.nu on the sphere
    return (
        -th * tu.lap * tv.lap
        - th * (tu.dnu_lap * tv.dnu + tv.dnu_lap * tu.dnu)
        + tu.lap * (tv.dnu + th * tv.nu_hess_nu)
        + tv.lap * (tu.dnu + th * tu.nu_hess_nu)
    )


def _q_integrand(tu: BoundaryTrace, tv: BoundaryTrace, i: int) -> np.ndarray:
    return (
        tu.lap * tv.lap * tu.normals[:, i]
        + tu.dnu_lap * tv.grad[:, i]
        + tv.dnu_lap * tu.grad[:, i]
        - tu.lap * tv.hess_nu[:, i]
        - tv.lap * tu.hess_nu[:, i]
    )


def form_P(u_trace: BoundaryTrace, v_trace: BoundaryTrace) -> FormValue:
    """First surface form; theta-independent for biharmonic pairs."""
    _require_aligned(u_trace, v_trace)
    value = float(np.dot(u_trace.weights, _p_integrand(u_trace, v_trace)))
    err = 0.0
    if u_trace.coarse is not None and v_trace.coarse is not None:
        coarse = float(
            np.dot(u_trace.coarse.weights, _p_integrand(u_trace.coarse, v_trace.coarse))
        )
        err = abs(value - coarse)
    return FormValue(value, u_trace.theta, err)


def form_Q(u_trace: BoundaryTrace, v_trace: BoundaryTrace, i: int) -> FormValue:
    """Second surface form for direction i in 0..3."""
    _require_aligned(u_trace, v_trace)
    if not 0 <= i < 4:
        raise InvalidArgumentError(f"direction index must be in 0..3, got {i}")
    value = float(np.dot(u_trace.weights, _q_integrand(u_trace, v_trace, i)))
    err = 0.0
    if u_trace.coarse is not None and v_trace.coarse is not None:
        coarse = float(
            np.dot(u_trace.coarse.weights, _q_integrand(u_trace.coarse, v_trace.coarse, i))
        )
        err = abs(value - coarse)
    return FormValue(value, u_trace.theta, err)


# ---------------------------------------------------------------------------
# the Green-function form table


@dataclass(frozen=True)
class TableEntry:
    """One table row: a computed form value against its closed-form target."""

    form: str            # "P" or "Q"
    j: int
    s: int
    m: int
    h: Optional[int]     # center-slot derivative axis, None for plain pairs
    i: Optional[int]     # Q direction, None for P
    computed: FormValue
    expected: float

    @property
    def deviation(self) -> float:
        return abs(self.computed.value - self.expected)

    @property
    def entry_id(self) -> str:
        tag = f"{self.form}[j={self.j},s={self.s},m={self.m}"
        if self.h is not None:
            tag += f",h={self.h}"
        if self.i is not None:
            tag += f",i={self.i}"
        return tag + "]"


def _table_theta(pts: np.ndarray, theta: float) -> float:
    # shrink until every doubled sphere stays inside and clears the other centers
    dmin = np.inf
    for a in range(pts.shape[0]):
        for b in range(a + 1, pts.shape[0]):
            dmin = min(dmin, float(np.linalg.norm(pts[a] - pts[b])))
    room = 1.0 - max(float(np.linalg.norm(p)) for p in pts)
    while theta > 0 and (2.0 * theta >= room or 2.0 * theta >= dmin):
        theta *= 0.5
    if not theta > 0:
        raise InvalidArgumentError("no admissible sphere radius for these centers")
    return theta


def green_form_table(centers, theta: float = 0.1, rule: Optional[TraceRule] = None):
    """Evaluate both forms on all Green-function pairs around each center.

    Returns a list of TableEntry comparing every computed value against
    the closed-form targets assembled from the ball's reflection
    structure: 1/(8 pi^2) and derivatives of the diagonal remainder R for
    self pairs, slot derivatives of G for cross pairs, zero otherwise.
    """
    pts = np.atleast_2d(np.asarray(centers, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise InvalidArgumentError("centers must be one or more 4-vectors")
    for p in pts:
        if np.dot(p, p) >= 1.0:
            raise InvalidArgumentError("table centers must lie inside the ball")
    k = pts.shape[0]
    theta = _table_theta(pts, float(theta))
    if rule is None:
        rule = product_trace_rule()

    norm = 1.0 / EIGHT_PI_SQ
    entries = []
    for j in range(k):
        g_tr = [boundary_trace(green_field(pts[s]), pts[j], theta, rule) for s in range(k)]
        dg_tr = {
            (s, h): boundary_trace(
                green_center_derivative_field(pts[s], h), pts[j], theta, rule
            )
            for s in range(k)
            for h in range(4)
        }
        rgrad = greenball.robin_gradient(pts[j])
        rhess = greenball.robin_hessian(pts[j])
        cgrad = {
            s: greenball.green_center_gradient(pts[j], pts[s]) for s in range(k) if s != j
        }
        chess = {
            s: greenball.green_center_hessian(pts[j], pts[s]) for s in range(k) if s != j
        }
        mixed = {
            s: greenball.green_mixed_hessian(pts[s], pts[j]) for s in range(k) if s != j
        }

        for s in range(k):
            for m in range(k):
                expected = norm if (s == j and m == j) else 0.0
                entries.append(
                    TableEntry("P", j, s, m, None, None, form_P(g_tr[s], g_tr[m]), expected)
                )

        for s in range(k):
            for m in range(k):
                for h in range(4):
                    if s == j and m == j:
                        expected = -0.5 * rgrad[h]
                    elif m == j:
                        expected = -cgrad[s][h]
                    else:
                        expected = 0.0
                    entries.append(
                        TableEntry(
                            "P", j, s, m, h, None, form_P(g_tr[s], dg_tr[(m, h)]), expected
                        )
                    )

        for m in range(k):
            for s in range(k):
                for i in range(4):
                    if s == j and m == j:
                        expected = rgrad[i]
                    elif s == j:
                        expected = cgrad[m][i]
                    elif m == j:
                        expected = cgrad[s][i]
                    else:
                        expected = 0.0
                    entries.append(
                        TableEntry("Q", j, s, m, None, i, form_Q(g_tr[m], g_tr[s], i), expected)
                    )

        for m in range(k):
            for s in range(k):
                for h in range(4):
                    for i in range(4):
                        if s == j and m == j:
                            expected = 0.5 * rhess[i, h]
                        elif m == j:
                            expected = mixed[s][h, i]
                        elif s == j:
                            expected = chess[m][i, h]
                        else:
                            expected = 0.0
                        entries.append(
                            TableEntry(
                                "Q", j, s, m, h, i,
                                form_Q(g_tr[m], dg_tr[(s, h)], i), expected,
                            )
                        )
    return entries


# ---------------------------------------------------------------------------
# volume integrals of radial integrands over off-center balls


def _graded_breakpoints(hi: float, scale: float) -> np.ndarray:
    # geometric panels from below `scale` up to hi, anchored at zero
    s0 = min(scale, hi) / 64.0
    return np.concatenate([[0.0], np.geomspace(s0, hi, 28)])


def radial_ball_integral(
    f: Callable,
    center_norm: float,
    theta: float,
    inner_scale: Optional[float] = None,
    nodes_per_panel: int = 14,
) -> float:
    """Integrate f(|x|) over the ball |x - c| <= theta with |c| = center_norm.

    Spheres |x| = s intersect the ball in a cap; its solid-angle measure
    2 pi (psi0 - sin psi0 cos psi0) with cos psi0 = (s^2 + c^2 - theta^2)/(2sc)
    reduces the volume integral to one radial quadrature.  The measure
    vanishes like a 3/2 power where the spheres touch, so the cap range
    is parametrized as s = max(c,theta) - min(c,theta) cos(phi), which
    makes the integrand analytic in phi; panels grade toward small s,
    where concentrated profiles vary fastest.
    """
    c = abs(float(center_norm))
    th = float(theta)
    if not th > 0.0:
        raise InvalidArgumentError(f"radius must be positive, got {theta}")
    if inner_scale is None:
        inner_scale = th / 8.0
    total = 0.0

    if c < 1e-12:
        rule = panel_rule(_graded_breakpoints(th, inner_scale), nodes_per_panel)
        s = rule.nodes
        return 2.0 * np.pi ** 2 * float(np.dot(rule.weights, f(s) * s ** 3))

    if th > c:
        # spheres of radius below theta - c lie entirely inside the ball
        rule = panel_rule(_graded_breakpoints(th - c, inner_scale), nodes_per_panel)
        s = rule.nodes
        total += 2.0 * np.pi ** 2 * float(np.dot(rule.weights, f(s) * s ** 3))

    small, big = min(c, th), max(c, th)
    if big - small < 1e-12:
        # the cap range starts at the origin: grade phi toward zero since
        # s grows quadratically there
        phi_scale = np.sqrt(min(inner_scale, big) / big)
        bks = np.concatenate([[0.0], np.geomspace(phi_scale / 8.0, np.pi, 24)])
    else:
        bks = np.linspace(0.0, np.pi, 25)
    rule = panel_rule(bks, nodes_per_panel)
    phi = rule.nodes
    s = big - small * np.cos(phi)
    mu = np.clip((s ** 2 + c ** 2 - th ** 2) / (2.0 * s * c), -1.0, 1.0)
    psi0 = np.arccos(mu)
    measure = 2.0 * np.pi * (psi0 - np.sin(psi0) * np.cos(psi0))
    jac = small * np.sin(phi)
    total += float(np.dot(rule.weights, f(s) * s ** 3 * measure * jac))
    return total


# ---------------------------------------------------------------------------
# identity residuals for solutions and linearized solutions


@dataclass(frozen=True)
class IdentityReport:
    """Both identity residuals for one sphere.

    q_form and p_form are the surface-form sides; q_rhs and p_rhs are the
    nonlinearity-integral sides.  Residuals come in absolute form and
    relative to the natural scale of each identity: the larger of the two
    side values and the surface integral of the absolute integrand.  The
    latter keeps the relative measure meaningful on spheres where both
    sides vanish through symmetry or rapid decay of the nonlinearity; the
    residual is then judged against the size of what had to cancel.
    """

    center: np.ndarray
    theta: float
    direction: int
    q_form: FormValue
    q_rhs: float
    p_form: FormValue
    p_rhs: float
    q_scale: float = 0.0
    p_scale: float = 0.0

    @property
    def q_absolute(self) -> float:
        return abs(self.q_form.value - self.q_rhs)

    @property
    def p_absolute(self) -> float:
        return abs(self.p_form.value - self.p_rhs)

    @property
    def q_relative(self) -> float:
        gauge = max(abs(self.q_form.value), abs(self.q_rhs), self.q_scale, 1e-300)
        return self.q_absolute / gauge

    @property
    def p_relative(self) -> float:
        gauge = max(abs(self.p_form.value), abs(self.p_rhs), self.p_scale, 1e-300)
        return self.p_absolute / gauge


def _identity_geometry(center, theta, direction, rule):
    c = np.asarray(center, dtype=float)
    if c.shape != (4,):
        raise InvalidArgumentError("center must be a 4-vector")
    th = float(theta)
    if not th > 0.0:
        raise InvalidArgumentError(f"radius must be positive, got {theta}")
    if float(np.linalg.norm(c)) + 2.0 * th >= 1.0:
        raise InvalidArgumentError("doubled sphere exits the unit ball")
    if not 0 <= direction < 4:
        raise InvalidArgumentError(f"direction index must be in 0..3, got {direction}")
    if rule is None:
        # the meridian reduction needs full symmetry about the e1 axis
        if _axis_aligned(c) and direction == 0:
            rule = meridian_trace_rule()
        else:
            rule = product_trace_rule()
    return c, th, rule


def _coerce_profile(sol, p):
    if isinstance(sol, RadialProfile):
        if p is None:
            raise InvalidArgumentError("a bare RadialProfile needs an explicit exponent p")
        return sol, float(p)
    profile = sol.profile() if callable(getattr(sol, "profile", None)) else None
    if profile is None or not hasattr(sol, "p"):
        raise InvalidArgumentError("expected a RadialProfile or an object with .profile() and .p")
    return profile, float(sol.p)


def solution_identities(
    sol,
    center,
    theta: float,
    p: Optional[float] = None,
    direction: int = 0,
    rule: Optional[TraceRule] = None,
    inner_scale: Optional[float] = None,
) -> IdentityReport:
    """Residuals of the two quadratic-form identities for a solution.

    For u solving the clamped problem with exponent p, the first form
    with direction i equals 2/(p+1) times the surface flux of
    (u+)^{p+1} nu_i and the second equals 8/(p+1) times its ball integral
    minus 2 theta/(p+1) times its surface integral.  Both sides are
    computed independently: the forms from analytic traces, the right
    sides from surface sums and the cap-reduced radial volume integral.
    """
    profile, p = _coerce_profile(sol, p)
    c, th, rule = _identity_geometry(center, theta, direction, rule)
    tr = boundary_trace(ProfileField(profile), c, th, rule)

    fpow = np.clip(tr.value, 0.0, None) ** (p + 1.0)
    q_rhs = 2.0 / (p + 1.0) * float(np.dot(tr.weights, fpow * tr.normals[:, direction]))
    volume = radial_ball_integral(
        lambda s: np.clip(profile.u(s), 0.0, None) ** (p + 1.0),
        float(np.linalg.norm(c)),
        th,
        inner_scale=inner_scale,
    )
    surface = float(np.dot(tr.weights, fpow))
    p_rhs = 8.0 / (p + 1.0) * volume - 2.0 * th / (p + 1.0) * surface
    q_scale = max(
        float(np.dot(tr.weights, np.abs(_q_integrand(tr, tr, direction)))),
        2.0 / (p + 1.0) * surface,
    )
    p_scale = max(
        float(np.dot(tr.weights, np.abs(_p_integrand(tr, tr)))),
        8.0 / (p + 1.0) * abs(volume) + 2.0 * th / (p + 1.0) * surface,
    )
    return IdentityReport(
        center=c,
        theta=th,
        direction=direction,
        q_form=form_Q(tr, tr, direction),
        q_rhs=q_rhs,
        p_form=form_P(tr, tr),
        p_rhs=p_rhs,
        q_scale=q_scale,
        p_scale=p_scale,
    )


def linearized_identities(
    sol,
    kind: str,
    center,
    theta: float,
    p: Optional[float] = None,
    direction: int = 0,
    rule: Optional[TraceRule] = None,
    inner_scale: Optional[float] = None,
) -> IdentityReport:
    """Residuals of the mixed identities for an exact linearized solution.

    kind selects the test field: "translation" uses xi = d_1 u, which
    solves the linearized equation wherever u > 0; "dilation" uses
    xi = x.grad u + 4u/(p-1).  The identities read

        Q_i(xi, u) = int_surface (u+)^p xi nu_i,
        P(xi, u)   = 4 int_ball (u+)^p xi  -  theta int_surface (u+)^p xi.

    The ball integral is reduced exactly to surface and radial integrals
    of (u+)^{p+1} through the divergence theorem, so no four-dimensional
    quadrature is involved.
    """
    profile, p = _coerce_profile(sol, p)
    c, th, rule = _identity_geometry(center, theta, direction, rule)
    if kind == "translation":
        if not _axis_aligned(c):
            raise InvalidArgumentError("translation checks expect a center on the e1 axis")
        xi_field = AxisDerivativeField(profile, axis=0)
    elif kind == "dilation":
        if p <= 1.0:
            raise InvalidArgumentError("dilation test field needs p > 1")
        xi_field = ProfileField(scaling_profile(profile, 4.0 / (p - 1.0)))
    else:
        raise InvalidArgumentError(f"unknown linearized test field kind: {kind!r}")

    tr_u = boundary_trace(ProfileField(profile), c, th, rule)
    tr_xi = boundary_trace(xi_field, c, th, rule)

    upow = np.clip(tr_u.value, 0.0, None) ** p
    fpow = np.clip(tr_u.value, 0.0, None) ** (p + 1.0)
    q_rhs = float(np.dot(tr_u.weights, upow * tr_xi.value * tr_u.normals[:, direction]))
    surface = float(np.dot(tr_u.weights, upow * tr_xi.value))

    def cap(s):
        return np.clip(profile.u(s), 0.0, None) ** (p + 1.0)

    if kind == "translation":
        # int (u+)^p d_1 u = int d_1 (u+)^{p+1} / (p+1), then the divergence theorem
        volume = float(np.dot(tr_u.weights, fpow * tr_u.normals[:, 0])) / (p + 1.0)
    else:
        # int (u+)^p (x.grad u + beta u) with beta = 4/(p-1); pushing the
        # radial transport term to the surface leaves 8/(p^2-1) times the
        # ball integral of (u+)^{p+1}
        x_dot_nu = tr_u.normals @ c + th
        volume = (
            float(np.dot(tr_u.weights, fpow * x_dot_nu)) / (p + 1.0)
            + 8.0 / (p ** 2 - 1.0)
            * radial_ball_integral(cap, float(np.linalg.norm(c)), th, inner_scale=inner_scale)
        )
    p_rhs = 4.0 * volume - th * surface
    q_scale = max(
        float(np.dot(tr_u.weights, np.abs(_q_integrand(tr_xi, tr_u, direction)))),
        float(np.dot(tr_u.weights, np.abs(upow * tr_xi.value))),
    )
    p_scale = max(
        float(np.dot(tr_u.weights, np.abs(_p_integrand(tr_xi, tr_u)))),
        4.0 * abs(volume) + th * abs(surface),
    )
    return IdentityReport(
        center=c,
        theta=th,
        direction=direction,
        q_form=form_Q(tr_xi, tr_u, direction),
        q_rhs=q_rhs,
        p_form=form_P(tr_xi, tr_u),
        p_rhs=p_rhs,
        q_scale=q_scale,
        p_scale=p_scale,
    )
