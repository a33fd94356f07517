"""Green function of the clamped bilaplacian on the unit 4-ball.

Boggio's closed form: with the comparison quantity

    [x,y]^2 = |x-y|^2 + (1-|x|^2)(1-|y|^2),    M = [x,y]/|x-y| >= 1,

the Green function is G(x,y) = (1/8 pi^2) int_1^M (v^2-1)/v^3 dv, which
the primitive ln v + 1/(2 v^2) evaluates to

    G(x,y) = (1/8 pi^2) (ln M + 1/(2 M^2) - 1/2).

The integrand is positive, so G > 0 away from the diagonal.  Splitting
off the fundamental solution S(x,y) = -ln|x-y| / (8 pi^2) leaves the
regular part H = G - S, smooth across the diagonal, whose diagonal
value is the Robin function

    R(x) = H(x,x) = (ln(1-|x|^2) - 1/2) / (8 pi^2).

Configurations of k interior points are scored by the interaction
functional psi_k(a) = sum_j [ R(a_j) + sum_{m != j} G(a_j, a_m) ];
its critical points solve grad R(a_j)/2 + sum_{m != j} grad_x G(a_j, a_m) = 0
and their Hessian non-degeneracy is the hypothesis the spectral checks
report alongside.  Derivatives are taken by 4th-order central
differences with steps scaled by the distance to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, SingularArgumentError, SolverError
from .numerics import gauss_rule

EIGHT_PI_SQ = 8.0 * np.pi ** 2

# 4th-order central first-difference stencil (offsets, weights*12)
_D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (4,):
        raise InvalidArgumentError(f"expected a 4-vector, got shape {x.shape}")
    if np.dot(x, x) >= 1.0:
        raise InvalidArgumentError(f"point must lie strictly inside the ball: |x| = {np.linalg.norm(x):g}")
    return x


def _split_distances(x, y):
    # d2 = |x-y|^2 and the boundary product q = (1-|x|^2)(1-|y|^2);
    # everything downstream is a function of (d2, q) only
    d = x - y
    d2 = float(np.dot(d, d))
    q = float((1.0 - np.dot(x, x)) * (1.0 - np.dot(y, y)))
    return d2, q


def boggio_green(x, y) -> float:
    """G(x,y) via the closed-form primitive; positive and symmetric."""
    x, y = _as_point(x), _as_point(y)
    d2, q = _split_distances(x, y)
    if d2 == 0.0:
        raise SingularArgumentError("Green function evaluated on the diagonal")
    # ln M = (1/2) ln(1 + q/d2) and 1/(2 M^2) = d2 / (2 (d2 + q)),
    # stable for x near y where M blows up
    return (0.5 * np.log1p(q / d2) + 0.5 * d2 / (d2 + q) - 0.5) / EIGHT_PI_SQ


def boggio_green_quadrature(x, y, order: int = 64) -> float:
    """Direct v-integral of (v^2-1)/v^3, kept as an oracle for G.

    Substituting v = e^s makes the integrand entire, so a fixed-order
    Gauss rule converges to machine precision for any M.
    """
    x, y = _as_point(x), _as_point(y)
    d2, q = _split_distances(x, y)
    if d2 == 0.0:
        raise SingularArgumentError("Green function evaluated on the diagonal")
    ln_m = 0.5 * np.log1p(q / d2)
    rule = gauss_rule(order, 0.0, ln_m)
    return float(np.sum(rule.weights * (1.0 - np.exp(-2.0 * rule.nodes)))) / EIGHT_PI_SQ


def fundamental_solution(c, x) -> float:
    """S(c,x) = -ln|x-c| / (8 pi^2), the free-space log kernel."""
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    d = x - c
    d2 = float(np.dot(d, d))
    if d2 == 0.0:
        raise SingularArgumentError("fundamental solution evaluated at its pole")
    # ln d2 = 2 ln|x-c|
    return -0.5 * np.log(d2) / EIGHT_PI_SQ


def regular_part(x, y) -> float:
    """H(x,y) = G(x,y) + ln|x-y|/(8 pi^2), smooth across the diagonal."""
    x, y = _as_point(x), _as_point(y)
    d2, q = _split_distances(x, y)
    # G + ln|x-y|/(8 pi^2) combines to (1/2) ln(d2+q) with no singular split
    return (0.5 * np.log(d2 + q) + 0.5 * d2 / (d2 + q) - 0.5) / EIGHT_PI_SQ


def robin(x) -> float:
    """R(x) = H(x,x) = (ln(1-|x|^2) - 1/2) / (8 pi^2)."""
    x = _as_point(x)
    return (np.log1p(-np.dot(x, x)) - 0.5) / EIGHT_PI_SQ


def robin_gradient_exact(x) -> np.ndarray:
    """Closed-form grad R = -2x / ((1-|x|^2) 8 pi^2), a test anchor."""
    x = _as_point(x)
    return -2.0 * x / ((1.0 - np.dot(x, x)) * EIGHT_PI_SQ)


# ---------------------------------------------------------------------------
# scaled-step finite differences of the closed forms


def _step(x) -> float:
    return 1e-3 * (1.0 - float(np.linalg.norm(x)))


def robin_gradient(x) -> np.ndarray:
    x = _as_point(x)
    h = _step(x)
    out = np.zeros(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        vals = [robin(x + o * h * e) for o in _D1_OFFSETS]
        out[i] = np.dot(_D1_WEIGHTS, vals) / h
    return out


def robin_hessian(x) -> np.ndarray:
    x = _as_point(x)
    h = _step(x)
    out = np.empty((4, 4))
    for i in range(4):
        ei = np.zeros(4)
        ei[i] = 1.0
        out[i, i] = (
            -robin(x - 2 * h * ei)
            + 16 * robin(x - h * ei)
            - 30 * robin(x)
            + 16 * robin(x + h * ei)
            - robin(x + 2 * h * ei)
        ) / (12 * h ** 2)
        for j in range(i + 1, 4):
            ej = np.zeros(4)
            ej[j] = 1.0
            acc = 0.0
            for a, wa in zip(_D1_OFFSETS, _D1_WEIGHTS):
                for b, wb in zip(_D1_OFFSETS, _D1_WEIGHTS):
                    acc += wa * wb * robin(x + a * h * ei + b * h * ej)
            out[i, j] = out[j, i] = acc / h ** 2
    return out


def green_center_gradient(c, x) -> np.ndarray:
    """Gradient of G in its first (center) slot at fixed field point x."""
    c, x = _as_point(c), _as_point(x)
    h = _step(c)
    out = np.zeros(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        vals = [boggio_green(c + o * h * e, x) for o in _D1_OFFSETS]
        out[i] = np.dot(_D1_WEIGHTS, vals) / h
    return out


def green_center_hessian(c, x) -> np.ndarray:
    """Second derivatives of G in the center slot."""
    c, x = _as_point(c), _as_point(x)
    h = _step(c)
    out = np.empty((4, 4))
    for i in range(4):
        ei = np.zeros(4)
        ei[i] = 1.0
        out[i, i] = (
            -boggio_green(c - 2 * h * ei, x)
            + 16 * boggio_green(c - h * ei, x)
            - 30 * boggio_green(c, x)
            + 16 * boggio_green(c + h * ei, x)
            - boggio_green(c + 2 * h * ei, x)
        ) / (12 * h ** 2)
        for j in range(i + 1, 4):
            ej = np.zeros(4)
            ej[j] = 1.0
            acc = 0.0
            for a, wa in zip(_D1_OFFSETS, _D1_WEIGHTS):
                for b, wb in zip(_D1_OFFSETS, _D1_WEIGHTS):
                    acc += wa * wb * boggio_green(c + a * h * ei + b * h * ej, x)
            out[i, j] = out[j, i] = acc / h ** 2
    return out


def green_mixed_hessian(c, x) -> np.ndarray:
    """Second derivatives of G taken once in each slot.

    Row h differentiates the center slot at c, column i the field slot
    at x.  By symmetry of G the result equals the transpose with the
    arguments swapped.
    """
    c, x = _as_point(c), _as_point(x)
    hc, hx = _step(c), _step(x)
    out = np.empty((4, 4))
    for h in range(4):
        ec = np.zeros(4)
        ec[h] = 1.0
        for i in range(4):
            ex = np.zeros(4)
            ex[i] = 1.0
            acc = 0.0
            for a, wa in zip(_D1_OFFSETS, _D1_WEIGHTS):
                for b, wb in zip(_D1_OFFSETS, _D1_WEIGHTS):
                    acc += wa * wb * boggio_green(c + a * hc * ec, x + b * hx * ex)
            out[h, i] = acc / (hc * hx)
    return out


# ---------------------------------------------------------------------------
# interaction functional over point configurations


def _check_configuration(points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise InvalidArgumentError(f"expected k x 4 points, got shape {pts.shape}")
    for a in pts:
        _as_point(a)
    k = pts.shape[0]
    for j in range(k):
        for m in range(j + 1, k):
            if np.linalg.norm(pts[j] - pts[m]) < 1e-10:
                raise InvalidArgumentError("configuration points must be pairwise distinct")
    return pts


def _interaction_value(pts: np.ndarray) -> float:
    k = pts.shape[0]
    total = 0.0
    for j in range(k):
        total += robin(pts[j])
        for m in range(k):
            if m != j:
                total += boggio_green(pts[j], pts[m])
    return total


@dataclass(frozen=True)
class KRConfiguration:
    """A k-point configuration with its interaction value and derivatives.

    gradient is the flattened 4k-vector of first derivatives; hessian
    the 4k x 4k matrix of second derivatives, symmetric by construction
    of the product-stencil mixed differences.
    """

    points: np.ndarray = field(repr=False)
    value: float
    gradient: np.ndarray = field(repr=False)
    hessian: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @cached_property
    def hessian_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.hessian)

    @property
    def min_abs_eigenvalue(self) -> float:
        return float(np.min(np.abs(self.hessian_eigenvalues)))

    @property
    def nondegenerate(self) -> bool:
        # concrete numeric gate for the non-degeneracy hypothesis
        return self.min_abs_eigenvalue > 1e-6


def _config_steps(pts: np.ndarray) -> np.ndarray:
    return np.array([_step(a) for a in pts])


def _interaction_gradient(pts: np.ndarray) -> np.ndarray:
    k = pts.shape[0]
    steps = _config_steps(pts)
    grad = np.zeros(4 * k)
    for j in range(k):
        h = steps[j]
        for i in range(4):
            vals = []
            for o in _D1_OFFSETS:
                q = pts.copy()
                q[j, i] += o * h
                vals.append(_interaction_value(q))
            grad[4 * j + i] = np.dot(_D1_WEIGHTS, vals) / h
    return grad


def _interaction_hessian(pts: np.ndarray) -> np.ndarray:
    k = pts.shape[0]
    steps = _config_steps(pts)
    n = 4 * k
    hess = np.empty((n, n))
    f0 = _interaction_value(pts)

    def shifted(c, dc, d, dd):
        q = pts.copy()
        q[c // 4, c % 4] += dc
        q[d // 4, d % 4] += dd
        return _interaction_value(q)

    for c in range(n):
        h = steps[c // 4]
        hess[c, c] = (
            -shifted(c, -2 * h, c, 0)
            + 16 * shifted(c, -h, c, 0)
            - 30 * f0
            + 16 * shifted(c, h, c, 0)
            - shifted(c, 2 * h, c, 0)
        ) / (12 * h ** 2)
        for d in range(c + 1, n):
            hd = steps[d // 4]
            acc = 0.0
            for a, wa in zip(_D1_OFFSETS, _D1_WEIGHTS):
                for b, wb in zip(_D1_OFFSETS, _D1_WEIGHTS):
                    acc += wa * wb * shifted(c, a * h, d, b * hd)
            hess[c, d] = hess[d, c] = acc / (h * hd)
    return hess


def kirchhoff_routh(points) -> KRConfiguration:
    """Evaluate the interaction functional with gradient and Hessian."""
    pts = _check_configuration(points)
    return KRConfiguration(
        points=pts,
        value=_interaction_value(pts),
        gradient=_interaction_gradient(pts),
        hessian=_interaction_hessian(pts),
    )


def find_kr_critical(initial, tol: float = 1e-12, max_iter: int = 40) -> KRConfiguration:
    """Newton search for a critical configuration of the interaction.

    The Hessian may be singular along rotation orbits for k >= 2, so the
    step solves the normal equations in the least-squares sense, which
    stays on the symmetry slice when the gradient does.
    """
    pts = _check_configuration(initial)
    k = pts.shape[0]
    for _ in range(max_iter):
        grad = _interaction_gradient(pts)
        if np.max(np.abs(grad)) < tol:
            return kirchhoff_routh(pts)
        hess = _interaction_hessian(pts)
        step, *_ = np.linalg.lstsq(hess, -grad, rcond=1e-9)
        step = step.reshape(k, 4)
        scale = 1.0
        for _ in range(30):
            new = pts + scale * step
            if np.all(np.sum(new ** 2, axis=1) < 1.0):
                break
            scale *= 0.5
        else:
            raise SolverError("Newton iterates pushed to the boundary")
        pts = new
    raise SolverError(f"no critical configuration within {max_iter} Newton steps")
