"""Batch verification front end.

Each subcommand runs one module's verification checks and emits a
machine-readable report: a ``bubble | green | pohozaev | solve |
branch | spectrum`` family for the individual layers and ``verify``
for composed suites.  Reports are deterministic for a fixed
configuration: stable key order, reals printed with 17 significant
digits, no timestamps.  The process exits 0 exactly when every
emitted check passes, 1 when some check fails, and 2 on usage errors.

Every check record carries an anchor: a short statement of the
mathematical fact being checked, or the literal string "plumbing" for
artifact-level contracts such as convergence of an internal iteration.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import click
import numpy as np

from . import __version__, bubble, greenball, pohozaev, spectrum
from .errors import InvalidArgumentError
from .numerics import S3_AREA
from .solver import (
    RESIDUAL_TOL,
    asymptotic_report,
    continuation,
    newton_solve,
)

_FLOAT_FMT = ".17g"


# ---------------------------------------------------------------------------
# configuration and report types


@dataclass(frozen=True)
class RunConfig:
    """One batch invocation: subcommand plus its numeric steering."""

    subcommand: str
    p: float = 10.0
    p_start: float = 10.0
    p_stop: float = 160.0
    lmax: int = 4
    theta: float = 0.1
    pairs: int = 1000
    tol: Optional[float] = None
    seed: int = 0
    out: str = "-"
    fmt: str = "json"
    suites: tuple = ()
    quick: bool = False

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0.0:
            raise InvalidArgumentError("tolerance must be positive")
        if self.fmt not in ("json", "csv"):
            raise InvalidArgumentError(f"unknown format {self.fmt!r}")
        if not self.p > 2.0:
            raise InvalidArgumentError("exponent p must exceed 2")
        if not self.p_stop > self.p_start:
            raise InvalidArgumentError("p grid must be increasing")
        if not 0 <= self.lmax <= spectrum.MAX_MODE:
            raise InvalidArgumentError(f"lmax must lie in 0..{spectrum.MAX_MODE}")
        if self.pairs < 1:
            raise InvalidArgumentError("pairs must be positive")
        if self.theta <= 0.0 or self.theta >= 1.0:
            raise InvalidArgumentError("theta must lie in (0, 1)")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be nonnegative")

    def echo(self) -> dict:
        d = {"subcommand": self.subcommand}
        used = {
            "bubble": (),
            "green": ("pairs", "seed"),
            "pohozaev": ("theta",),
            "solve": ("p", "theta"),
            "branch": ("p_start", "p_stop"),
            "spectrum": ("p_start", "p_stop", "lmax"),
            "verify": ("suites", "quick"),
        }[self.subcommand]
        for name in used:
            value = getattr(self, name)
            d[name] = list(value) if isinstance(value, tuple) else value
        if self.tol is not None:
            d["tol"] = self.tol
        d["format"] = self.fmt
        return d


@dataclass(frozen=True)
class CheckRecord:
    """One verified quantity: pass holds iff deviation <= tolerance."""

    check_id: str
    anchor: str
    computed: float
    expected: float
    deviation: float
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def as_dict(self) -> dict:
        d = {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "computed": self.computed,
            "expected": self.expected,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class Report:
    """Complete result of one run: config echo, checks, payload."""

    version: str
    config: RunConfig
    records: tuple
    payload: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(rec.passed for rec in self.records)

    def as_document(self) -> dict:
        doc = {
            "version": self.version,
            "config": self.config.echo(),
            "checks": [rec.as_dict() for rec in self.records],
            "all_pass": self.all_pass,
        }
        doc.update(self.payload)
        return doc


def _rel(check_id, anchor, computed, expected, tol) -> CheckRecord:
    dev = abs(float(computed) - float(expected)) / max(abs(float(expected)), 1e-300)
    return CheckRecord(
        check_id, anchor, float(computed), float(expected), dev, float(tol)
    )


def _abs(check_id, anchor, computed, expected, tol) -> CheckRecord:
    return CheckRecord(
        check_id, anchor, float(computed), float(expected),
        abs(float(computed) - float(expected)), float(tol),
    )


def _bound(check_id, anchor, computed, lower, note="") -> CheckRecord:
    # pass iff computed >= lower; deviation is the shortfall
    dev = max(0.0, float(lower) - float(computed))
    return CheckRecord(check_id, anchor, float(computed), float(lower), dev, 0.0, note)


def _flag(check_id, anchor, ok: bool, note="") -> CheckRecord:
    return CheckRecord(
        check_id, anchor, 1.0 if ok else 0.0, 1.0, 0.0 if ok else 1.0, 0.0, note
    )


# ---------------------------------------------------------------------------
# subcommand suites


def _bubble_suite(cfg: RunConfig):
    tol = cfg.tol
    cc = bubble.correction_constants()
    eta = bubble.solve_eta0(bubble.default_correction_grid())
    a_target = -(416.0 / 3.0) * S3_AREA
    recs = [
        _rel(
            "bubble.mass", "integral of e^Z over R^4 = 64 pi^2",
            bubble.bubble_moment("mass"), 64.0 * np.pi ** 2, tol or 1e-10,
        ),
        _rel(
            "bubble.log-moment",
            "integral of ln|z| e^Z = 32 pi^2 ln(8 sqrt 6)",
            bubble.bubble_moment("log"),
            32.0 * np.pi ** 2 * np.log(bubble.CORE_SCALE_SQ), tol or 1e-8,
        ),
        _rel(
            "bubble.second-moment",
            "unit-scale second moment of the profile density = 128 pi^2",
            bubble.bubble_moment("second"), 128.0 * np.pi ** 2, tol or 1e-8,
        ),
        _rel(
            "bubble.j-moment",
            "int_0^inf r^3 (1-r^2) ln^2(1+r^2) (1+r^2)^-5 dr = -13/288",
            cc.j_half, -13.0 / 288.0, tol or 1e-10,
        ),
        _rel(
            "bubble.j-moment-ledger",
            "same moment vs the 2/(m+1)^3 series ledger",
            cc.j_half, bubble._j_half_ledger(), tol or 1e-10,
        ),
        _abs(
            "bubble.correction-ode-residual",
            "plumbing", eta.ode_residual, 0.0, tol or 1e-6,
        ),
        _abs(
            "bubble.correction-far-constant",
            "far-field constant of the correction profile vanishes",
            eta.c0, 0.0, tol or 1e-8,
        ),
        _rel(
            "bubble.correction-log-coefficient",
            "far-field log coefficient of the correction = 104/3",
            eta.a0, 104.0 / 3.0, tol or 1e-3,
        ),
        _rel(
            "bubble.correction-flux",
            "correction flux constant = -416/3",
            eta.l0, -416.0 / 3.0, tol or 1e-3,
        ),
        _rel(
            "bubble.a-volume-vs-pairing",
            "volume route for A matches the far-field pairing route",
            eta.a_integral, cc.a, tol or 1e-4,
        ),
        _rel(
            "bubble.a-volume-vs-flux",
            "volume route for A matches |S^3| times the flux constant",
            eta.a_integral, S3_AREA * eta.l0, tol or 1e-4,
        ),
        _rel(
            "bubble.a-target",
            "A = -(416/3) |S^3|",
            cc.a, a_target, tol or 1e-3,
        ),
    ]
    constants = {
        "A": cc.a,
        "A_volume": eta.a_integral,
        "A_flux": S3_AREA * eta.l0,
        "A_target": a_target,
        "j_half": cc.j_half,
        "psi_s": cc.psi_s,
        "a0": eta.a0,
        "l0": eta.l0,
        "c0": eta.c0,
        "ode_residual": eta.ode_residual,
    }
    return recs, {"constants": constants}


def _green_suite(cfg: RunConfig):
    tol = cfg.tol
    rng = np.random.default_rng(cfg.seed)

    def interior():
        while True:
            x = rng.uniform(-1.0, 1.0, size=4)
            if np.dot(x, x) < 0.9 ** 2:
                return x

    worst_g = np.inf
    worst_sym = 0.0
    for _ in range(cfg.pairs):
        x, y = interior(), interior()
        if np.allclose(x, y):
            continue
        g = greenball.boggio_green(x, y)
        gt = greenball.boggio_green(y, x)
        worst_g = min(worst_g, g)
        worst_sym = max(worst_sym, abs(g - gt) / max(abs(g), 1e-300))

    quad_dev = 0.0
    for _ in range(10):
        x = interior()
        d = rng.normal(size=4)
        d /= np.linalg.norm(d)
        delta = 1e-5 * (1.0 - np.linalg.norm(x))
        acc = 0.0
        for s in (1.0, -1.0):
            y = x + s * delta * d
            d2 = float(np.dot(x - y, x - y))
            acc += greenball.boggio_green_quadrature(x, y)
            acc += 0.5 * np.log(d2) / (8.0 * np.pi ** 2)
        quad_dev = max(quad_dev, abs(0.5 * acc - greenball.robin(x)))

    kr = greenball.kirchhoff_routh(np.zeros((1, 4)))
    curv = -1.0 / (4.0 * np.pi ** 2)
    hess_dev = float(np.max(np.abs(kr.hessian - curv * np.eye(4)))) / abs(curv)
    recs = [
        _bound(
            "green.positivity",
            "clamped Green function of the ball is positive",
            worst_g, 0.0, note=f"{cfg.pairs} sampled pairs",
        ),
        _abs(
            "green.symmetry",
            "G(x, y) = G(y, x)", worst_sym, 0.0, tol or 1e-10,
        ),
        _rel(
            "green.robin-center",
            "diagonal remainder at the center = -1/(16 pi^2)",
            greenball.robin(np.zeros(4)), -1.0 / (16.0 * np.pi ** 2), tol or 1e-8,
        ),
        _abs(
            "green.robin-quadrature-limit",
            "closed-form diagonal remainder matches the quadrature diagonal limit",
            quad_dev, 0.0, tol or 1e-8,
        ),
        _abs(
            "green.interaction-gradient",
            "single-point interaction function is critical at the center",
            float(np.max(np.abs(kr.gradient))), 0.0, tol or 1e-6,
        ),
        _abs(
            "green.interaction-hessian",
            "interaction Hessian at the center = -1/(4 pi^2) identity",
            hess_dev, 0.0, tol or 1e-6,
        ),
    ]
    return recs, {}


def _pohozaev_suite(cfg: RunConfig):
    tol = cfg.tol
    centers = np.array(
        [
            [0.30, 0.00, 0.00, 0.00],
            [-0.15, 0.20, 0.10, 0.00],
        ]
    )
    recs = []
    for entry in pohozaev.green_form_table(centers, theta=cfg.theta):
        recs.append(
            _abs(
                f"pohozaev.{entry.entry_id}",
                "sphere form on Green pairs vs ball reflection closed form",
                entry.computed.value, entry.expected, tol or 1e-5,
            )
        )

    by_theta = []
    for theta in (0.05, 0.1, 0.2):
        entries = pohozaev.green_form_table(centers[:1], theta=theta)
        by_theta.append(np.array([e.computed.value for e in entries]))
    spread = float(np.max(np.ptp(np.vstack(by_theta), axis=0)))
    recs.append(
        _abs(
            "pohozaev.theta-independence",
            "sphere-radius independence of the form values",
            spread, 0.0, tol or 1e-8,
        )
    )
    return recs, {}


def _solve_suite(cfg: RunConfig):
    tol = cfg.tol
    sol = newton_solve(cfg.p)
    inner = min(cfg.theta / 8.0, bubble.CORE_SCALE * sol.eps_p)
    recs = [
        _abs(
            "solve.newton-residual", "plumbing",
            sol.newton_residual, 0.0, tol or RESIDUAL_TOL,
        )
    ]
    centers = {"center": np.zeros(4), "offset": np.array([0.2, 0.0, 0.0, 0.0])}
    for name, center in centers.items():
        ident = pohozaev.solution_identities(
            sol, center, cfg.theta, inner_scale=inner
        )
        recs.append(
            _abs(
                f"solve.translation-identity-{name}",
                "translation surface identity of the solution",
                ident.q_relative, 0.0, tol or 1e-5,
            )
        )
        recs.append(
            _abs(
                f"solve.dilation-identity-{name}",
                "dilation surface identity of the solution",
                ident.p_relative, 0.0, tol or 1e-5,
            )
        )
        for kind in ("translation", "dilation"):
            lin = pohozaev.linearized_identities(
                sol, kind, center, cfg.theta, inner_scale=inner
            )
            recs.append(
                _abs(
                    f"solve.linearized-{kind}-{name}",
                    "linearized surface identity with the exact test field",
                    max(lin.q_relative, lin.p_relative), 0.0, tol or 1e-5,
                )
            )
    payload = {
        "solution": {
            "p": sol.p,
            "u_max": sol.u_max,
            "eps_p": sol.eps_p,
            "iterations": sol.iterations,
            "newton_residual": sol.newton_residual,
        }
    }
    return recs, payload


def _top_octave_variation(p_values, series):
    mask = p_values >= p_values[-1] / 2.0
    vals = series[mask]
    return float((vals.max() - vals.min()) / np.abs(vals).max())


def _branch_suite(cfg: RunConfig):
    tol = cfg.tol
    branch = continuation(cfg.p_start, cfg.p_stop)
    rep = asymptotic_report(branch)
    p_vals = branch.p_values
    d0 = np.array([rec.rescaled.d0 for rec in branch.records])
    d1 = np.array([rec.rescaled.d1 for rec in branch.records])
    recs = [
        _abs(
            "branch.max-amplitude-coefficient",
            "1/p coefficient of the peak amplitude = 2 + 2 ln(8 sqrt 6) + 8/3",
            rep.c1_relative_error, 0.0, tol or 0.10,
        ),
        _abs(
            "branch.length-scale-constant",
            "constant of ln eps + p/8 = -1/2 - ln(8 sqrt 6)/2 - 13/24",
            rep.c2_relative_error, 0.0, tol or 0.10,
        ),
        _rel(
            "branch.mass-limit",
            "p C_p extrapolates to 64 pi^2 sqrt e",
            rep.mass_extrapolated, rep.mass_target, tol or 0.03,
        ),
        _bound(
            "branch.mass-correction-decay",
            "mass correction residual decays faster than 1/p",
            rep.mass_check_exponent, 1.5,
        ),
        _flag(
            "branch.max-amplitude-monotone",
            "peak amplitude decreases toward sqrt e",
            rep.u_max_monotone,
        ),
        _abs(
            "branch.rescaled-distance",
            "p times the rescaled profile distance stays bounded",
            _top_octave_variation(p_vals, p_vals * d0), 0.0, tol or 0.25,
        ),
        _abs(
            "branch.correction-distance",
            "p times the correction-profile distance stays bounded",
            _top_octave_variation(p_vals, p_vals * d1), 0.0, tol or 0.25,
        ),
    ]
    payload = {"records": [rec.as_dict() for rec in branch.records]}
    return recs, payload


def _spectrum_suite(cfg: RunConfig):
    tol = cfg.tol
    kernel = spectrum.liouville_kernel_check()
    branch = continuation(cfg.p_start, cfg.p_stop, with_identities=False)
    scan = spectrum.nondegeneracy_scan(branch, ell_max=cfg.lmax)
    recs = [
        _abs(
            "spectrum.kernel-dilation",
            "4 + r Z' solves the linearized limit equation",
            kernel.v0_residual, 0.0, tol or 1e-6,
        ),
        _abs(
            "spectrum.kernel-translation",
            "Z' solves the first-mode linearized limit equation",
            kernel.v1_residual, 0.0, tol or 1e-6,
        ),
        _rel(
            "spectrum.kernel-origin-value",
            "dilation kernel profile equals 4 at the origin",
            kernel.v0_origin, 4.0, tol or 1e-12,
        ),
        _flag(
            "spectrum.no-crossing",
            "no tracked eigenvalue of the solution linearization changes sign",
            not scan.any_crossing,
        ),
        _bound(
            "spectrum.min-abs-eigenvalue",
            "smallest eigenvalue magnitude stays positive along the branch",
            scan.min_abs_eig, 0.0,
        ),
        _flag(
            "spectrum.interaction-gate",
            "interaction Hessian non-degeneracy gate",
            scan.hessian_nondegenerate,
        ),
    ]
    return recs, {"rows": scan.as_rows()}


_SUITES: dict = {
    "bubble": _bubble_suite,
    "green": _green_suite,
    "pohozaev": _pohozaev_suite,
    "solve": _solve_suite,
    "branch": _branch_suite,
    "spectrum": _spectrum_suite,
}
_QUICK_SUITES = ("bubble", "pohozaev")


def run(config: RunConfig) -> Report:
    """Execute one configured batch run and collect its report.

    Module-level failures inside a suite become failing check records
    rather than aborting the whole run.
    """
    if config.subcommand == "verify":
        names = config.suites or (_QUICK_SUITES if config.quick else tuple(_SUITES))
        if config.quick:
            names = tuple(n for n in names if n in _QUICK_SUITES)
        unknown = [n for n in names if n not in _SUITES]
        if unknown:
            raise InvalidArgumentError(f"unknown suites: {unknown}")
        records: list = []
        for name in names:
            records.extend(_run_suite(name, config)[0])
        return Report(__version__, config, tuple(records))

    if config.subcommand not in _SUITES:
        raise InvalidArgumentError(f"unknown subcommand {config.subcommand!r}")
    records, payload = _run_suite(config.subcommand, config)
    return Report(__version__, config, tuple(records), payload)


def _run_suite(name: str, config: RunConfig):
    try:
        return _SUITES[name](config)
    except Exception as err:  # propagate as a failing check record
        rec = CheckRecord(
            check_id=f"{name}.error",
            anchor="plumbing",
            computed=0.0,
            expected=0.0,
            deviation=1.0,
            tolerance=0.0,
            note=f"{type(err).__name__}: {err}",
        )
        return [rec], {}


# ---------------------------------------------------------------------------
# deterministic serialization


def _render_value(obj) -> str:
    import json as _json

    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), _FLOAT_FMT)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return _json.dumps(obj)
    if isinstance(obj, dict):
        inner = ", ".join(
            f"{_json.dumps(str(k))}: {_render_value(v)}" for k, v in obj.items()
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_render_value(v) for v in obj) + "]"
    raise InvalidArgumentError(f"unserializable value of type {type(obj).__name__}")


def emit(report: Report, fmt: str = "json") -> bytes:
    """Serialize a report deterministically.

    JSON keeps construction key order and prints reals with 17
    significant digits; CSV emits the check table under the fixed
    header.  Two runs with the same configuration yield identical
    bytes.
    """
    if fmt == "json":
        return (_render_value(report.as_document()) + "\n").encode()
    if fmt == "csv":
        lines = ["check_id,anchor,computed,expected,deviation,pass"]
        for rec in report.records:
            lines.append(
                ",".join(
                    [
                        rec.check_id,
                        '"' + rec.anchor.replace('"', '""') + '"',
                        format(rec.computed, _FLOAT_FMT),
                        format(rec.expected, _FLOAT_FMT),
                        format(rec.deviation, _FLOAT_FMT),
                        "true" if rec.passed else "false",
                    ]
                )
            )
        return ("\n".join(lines) + "\n").encode()
    raise InvalidArgumentError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# command line wiring


def _write_out(data: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def _execute(config: RunConfig) -> None:
    report = run(config)
    _write_out(emit(report, config.fmt), config.out)
    if not report.all_pass:
        sys.exit(1)


def _make_config(subcommand: str, **kw) -> RunConfig:
    try:
        return RunConfig(subcommand=subcommand, **kw)
    except InvalidArgumentError as err:
        raise click.UsageError(str(err)) from err


def _parse_p_grid(text: str):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError as err:
        raise click.UsageError(f"p-grid must be START:STOP, got {text!r}") from err


_common = [
    click.option("--out", default="-", show_default=True, help="Output path or - for stdout."),
    click.option(
        "--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
        show_default=True, help="Report serialization."
    ),
    click.option("--tol", type=float, default=None, help="Override the per-check default tolerances."),
    click.option("--seed", type=int, default=0, show_default=True, help="Seed for sampled property checks."),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="bilap4d")
def main():
    """Verification runs for the 4D clamped concentration problem."""


@main.command("bubble")
@_with_common
def bubble_cmd(out, fmt, tol, seed):
    """Profile moments and correction-layer constants."""
    _execute(_make_config("bubble", out=out, fmt=fmt, tol=tol, seed=seed))


@main.command("green")
@_with_common
@click.option("--pairs", type=int, default=1000, show_default=True, help="Sampled point pairs.")
def green_cmd(out, fmt, tol, seed, pairs):
    """Green function positivity, diagonal remainder, interaction Hessian."""
    _execute(_make_config("green", out=out, fmt=fmt, tol=tol, seed=seed, pairs=pairs))


@main.command("pohozaev")
@_with_common
@click.option("--theta", type=float, default=0.1, show_default=True, help="Sphere radius for the forms.")
def pohozaev_cmd(out, fmt, tol, seed, theta):
    """Sphere-form value table and radius independence."""
    _execute(_make_config("pohozaev", out=out, fmt=fmt, tol=tol, seed=seed, theta=theta))


@main.command("solve")
@_with_common
@click.option("--p", type=float, default=10.0, show_default=True, help="Nonlinearity exponent.")
@click.option("--theta", type=float, default=0.1, show_default=True, help="Identity sphere radius.")
def solve_cmd(out, fmt, tol, seed, p, theta):
    """Single-exponent solve with surface identity checks."""
    _execute(_make_config("solve", out=out, fmt=fmt, tol=tol, seed=seed, p=p, theta=theta))


@main.command("branch")
@_with_common
@click.option("--p-grid", default="10:160", show_default=True, help="Exponent range START:STOP.")
def branch_cmd(out, fmt, tol, seed, p_grid):
    """Continuation run with fitted expansion constants."""
    lo, hi = _parse_p_grid(p_grid)
    _execute(
        _make_config("branch", out=out, fmt=fmt, tol=tol, seed=seed, p_start=lo, p_stop=hi)
    )


@main.command("spectrum")
@_with_common
@click.option("--p-grid", default="10:40", show_default=True, help="Exponent range START:STOP.")
@click.option("--lmax", type=int, default=4, show_default=True, help="Largest angular mode scanned.")
def spectrum_cmd(out, fmt, tol, seed, p_grid, lmax):
    """Kernel residuals and the branch eigenvalue scan."""
    lo, hi = _parse_p_grid(p_grid)
    _execute(
        _make_config(
            "spectrum", out=out, fmt=fmt, tol=tol, seed=seed,
            p_start=lo, p_stop=hi, lmax=lmax,
        )
    )


@main.command("verify")
@_with_common
@click.argument("suites", nargs=-1)
@click.option("--all", "all_", is_flag=True, help="Run every suite.")
@click.option("--quick", is_flag=True, help="Restrict to the constant-reproduction suites.")
def verify_cmd(out, fmt, tol, seed, suites, all_, quick):
    """Composed verification suites; exit 0 iff everything passes."""
    if not suites and not all_ and not quick:
        raise click.UsageError("name suites to run, or pass --all / --quick")
    picked = tuple(suites) if suites else ()
    cfg = _make_config(
        "verify", out=out, fmt=fmt, tol=tol, seed=seed, suites=picked, quick=quick
    )
    unknown = [n for n in picked if n not in _SUITES]
    if unknown:
        raise click.UsageError(f"unknown suites: {', '.join(unknown)}")
    _execute(cfg)


if __name__ == "__main__":
    main()
