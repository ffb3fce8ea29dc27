"""Sampling certificates for the global-dynamics parameter gates.

The sign of x*u_x + y*v_y (per-capita rates u, v) over the rectangle
D0 = (0, k1) x (0, ymax) decides, via the 1/(x*y) rescaling argument,
whether periodic orbits can exist there.  These checkers evaluate that
quantity on a dense grid with an explicit margin -- a sampling
certificate, not a proof -- evaluate the named parameter inequalities of
the global-stability and predator-extinction gates, and corroborate
passing gates by seeded batch simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import classify_boundary, interior_equilibria
from .integrator import EventSpec, IntegratorConfig, integrate
from .model import (
    Parameters,
    State,
    growth_balance_curve,
    predator_nullcline,
    prey_growth,
    weighted_trace,
)

__all__ = [
    "Region",
    "CheckItem",
    "CertificateReport",
    "build_D0",
    "peak_growth_balance",
    "trace_grid_certificate",
    "dulac_divergence",
    "check_corollary_global_stability",
    "check_extinction",
]

ALL_NEGATIVE = "all_negative"
ALL_POSITIVE = "all_positive"
MIXED = "mixed"

_SIGN_MARGIN = 1e-12
_SAMPLING_NOTE = "sampling certificate on an epsilon-inset grid, not a proof"


@dataclass(frozen=True)
class Region:
    """A closed rectangle with a sampling density."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    grid_n: int = 400

    def __post_init__(self):
        if not (self.x_range[1] > self.x_range[0] and self.y_range[1] > self.y_range[0]):
            raise ValueError("region ranges must have positive length")
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")


@dataclass(frozen=True)
class CheckItem:
    """One named condition with its computed sides."""

    ok: bool
    lhs: float | None = None
    rhs: float | None = None
    detail: str = ""


@dataclass
class CertificateReport:
    """Outcome of a certificate run.

    ``verdict`` is all_negative/all_positive/mixed for grid certificates
    and pass/fail for parameter-gate checks.  ``extremal_value`` is the
    sample closest to violating an all-one-sign verdict.
    """

    verdict: str
    checklist: dict[str, CheckItem] = field(default_factory=dict)
    extremal_value: float | None = None
    extremal_point: tuple[float, float] | None = None
    minimum: float | None = None
    minimum_point: tuple[float, float] | None = None
    maximum: float | None = None
    maximum_point: tuple[float, float] | None = None
    note: str = ""
    simulation: dict | None = None

    def all_ok(self) -> bool:
        return all(item.ok for item in self.checklist.values())


def peak_growth_balance(p: Parameters, tol: float = 1e-10) -> float:
    """Maximum of the balance curve (r1/s)*x*(1-x/k1)*(x-k0) over [0, k1].

    Golden-section search on [max(0, k0), k1] (the curve is single-humped
    there) plus endpoint checks.
    """
    lo, hi = max(0.0, p.k0), p.k1
    inv_gold = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_gold * (b - a)
    d = a + inv_gold * (b - a)
    fc, fd = growth_balance_curve(p, c), growth_balance_curve(p, d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_gold * (b - a)
            fc = growth_balance_curve(p, c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_gold * (b - a)
            fd = growth_balance_curve(p, d)
    best = max(fc, fd)
    return max(best, growth_balance_curve(p, lo), growth_balance_curve(p, hi), 0.0)


def build_D0(p: Parameters, grid_n: int = 400) -> Region:
    """The no-cycle certificate rectangle (0, k1) x (0, max(k1, peak balance))."""
    y_top = max(p.k1, peak_growth_balance(p))
    return Region(x_range=(0.0, p.k1), y_range=(0.0, y_top), grid_n=grid_n)


def trace_grid_certificate(p: Parameters, region: Region) -> CertificateReport:
    """Sign of x*u_x + y*v_y sampled on the epsilon-inset grid of a region.

    Verdict is all_negative/all_positive only when every sample clears
    zero with margin 1e-12; mixed otherwise.  The inset (1e-6 * k1) keeps
    the evaluation off the axes where the expression degenerates.
    """
    eps = 1e-6 * p.k1
    xs = np.linspace(region.x_range[0] + eps, region.x_range[1] - eps, region.grid_n)
    ys = np.linspace(region.y_range[0] + eps, region.y_range[1] - eps, region.grid_n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    T = weighted_trace(p, X, Y)
    imin = np.unravel_index(int(np.argmin(T)), T.shape)
    imax = np.unravel_index(int(np.argmax(T)), T.shape)
    tmin, tmax = float(T[imin]), float(T[imax])
    pmin = (float(X[imin]), float(Y[imin]))
    pmax = (float(X[imax]), float(Y[imax]))
    if tmax < -_SIGN_MARGIN:
        verdict, extremal, ep = ALL_NEGATIVE, tmax, pmax
    elif tmin > _SIGN_MARGIN:
        verdict, extremal, ep = ALL_POSITIVE, tmin, pmin
    else:
        verdict = MIXED
        extremal, ep = (tmin, pmin) if abs(tmin) >= abs(tmax) else (tmax, pmax)
    return CertificateReport(
        verdict=verdict,
        checklist={
            "max_sample_below_zero": CheckItem(tmax < -_SIGN_MARGIN, lhs=tmax, rhs=0.0),
            "min_sample_above_zero": CheckItem(tmin > _SIGN_MARGIN, lhs=tmin, rhs=0.0),
        },
        extremal_value=extremal,
        extremal_point=ep,
        minimum=tmin,
        minimum_point=pmin,
        maximum=tmax,
        maximum_point=pmax,
        note=_SAMPLING_NOTE,
    )


def dulac_divergence(p: Parameters, x, y):
    """Divergence of the vector field rescaled by 1/(x*y), full-field route.

    Computed from the full-field values and partials (product rule), this
    is an independent path from :func:`alleecoop.model.weighted_trace`;
    the two must satisfy div == weighted_trace/(x*y) pointwise.
    Array-friendly.
    """
    q = p.lam + p.A * y
    d = p.b + y + p.h * x * q
    d2 = d * d
    n_y = p.lam * p.b + 2.0 * p.A * p.b * y + p.A * y * y + p.h * x * q * q
    consumption = q * x * y / d
    f1 = prey_growth(p, x) - consumption
    f2 = consumption - p.s * y
    a11 = (
        p.r1 * (1.0 - x / p.k1) * (x - p.k0)
        + p.r1 * x * (1.0 + p.k0 / p.k1 - 2.0 * x / p.k1)
        - y * (p.b + y) * q / d2
    )
    a22 = x * n_y / d2 - p.s
    return (a11 + a22) / (x * y) - f1 / (x * x * y) - f2 / (x * y * y)


def _seeded_inits(p: Parameters, n: int, seed: int) -> list[State]:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.02 * p.k1, p.k1, size=(n, 2))
    return [State(float(a), float(b)) for a, b in pts]


def check_corollary_global_stability(
    p: Parameters,
    *,
    n_inits: int = 50,
    seed: int = 20240,
    horizon: float = 5000.0,
    converge_tol: float = 1e-5,
) -> CertificateReport:
    """The five-inequality gate for a unique globally attracting coexistence state.

    Checklist: k0 == -k1 (to 1e-12), lam > A*b, A*k1 < s, the growth-ratio
    bound, and the h ceiling.  When every gate passes, 50 seeded random
    starts are integrated and must all reach the unique interior
    equilibrium within ``converge_tol``.
    """
    y_top = max(p.k1, peak_growth_balance(p))
    sh = p.s * p.h
    items: dict[str, CheckItem] = {}
    items["k0_eq_minus_k1"] = CheckItem(abs(p.k0 + p.k1) <= 1e-12, lhs=p.k0, rhs=-p.k1)
    items["lam_gt_Ab"] = CheckItem(p.lam - p.A * p.b > 0.0, lhs=p.lam, rhs=p.A * p.b)
    items["Ak1_lt_s"] = CheckItem(p.A * p.k1 - p.s < 0.0, lhs=p.A * p.k1, rhs=p.s)
    ratio_lhs = (p.r1 / p.s) * (1.0 + p.k0 / p.k1)
    ratio_rhs = p.A * (p.lam - p.A * p.b) * (1.0 - sh) ** 2 / p.s**2
    items["growth_ratio"] = CheckItem(ratio_lhs < ratio_rhs, lhs=ratio_lhs, rhs=ratio_rhs)
    h_cap = min(
        (p.lam - p.A * p.b) / (p.lam + p.A * y_top) ** 2,
        (p.lam * p.k1 - p.s * p.b) / (p.s * p.lam * p.k1),
    )
    items["h_bound"] = CheckItem(p.h < h_cap, lhs=p.h, rhs=h_cap)

    report = CertificateReport(verdict="fail", checklist=items, note=_SAMPLING_NOTE)
    if not report.all_ok():
        return report

    interior = interior_equilibria(p)
    items["unique_interior"] = CheckItem(len(interior) == 1, lhs=float(len(interior)), rhs=1.0)
    if len(interior) != 1:
        return report
    target = interior[0].state
    items["interior_stable"] = CheckItem(
        interior[0].cls.startswith("stable"), detail=interior[0].cls
    )

    def dist(x, y):
        return math.hypot(x - target.x, y - target.y) - converge_tol

    spec = EventSpec(fn=dist, kind="converged", direction=-1, terminal=True, label="converged")
    n_conv = 0
    worst = 0.0
    for init in _seeded_inits(p, n_inits, seed):
        traj = integrate(p, init, IntegratorConfig(t_end=horizon, rel_tol=1e-8, abs_tol=1e-11), events=[spec])
        if traj.terminal_event is not None:
            n_conv += 1
        else:
            fin = traj.final_state()
            worst = max(worst, math.hypot(fin.x - target.x, fin.y - target.y))
    items["all_converged"] = CheckItem(n_conv == n_inits, lhs=float(n_conv), rhs=float(n_inits))
    report.simulation = {
        "n_inits": n_inits,
        "n_converged": n_conv,
        "target": (target.x, target.y),
        "converge_tol": converge_tol,
        "worst_final_distance": worst,
        "seed": seed,
    }
    report.verdict = "pass" if report.all_ok() else "fail"
    return report


def check_extinction(
    p: Parameters,
    *,
    n_inits: int = 50,
    seed: int = 20241,
    t_max: float = 1e4,
    y_floor: float = 1e-6,
    grid_n: int = 400,
) -> CertificateReport:
    """Predator-extinction gate under a strong Allee effect.

    Structural gates (s*h < 1, k0 > k1/2) plus one of two sign cases on
    lam - A*b and the predator nullcline at k0 and k1, plus the
    all-positive grid certificate on D0.  When a sign case passes, the
    unique interior equilibrium must be unstable and 50 seeded random
    starts must reach predator density below ``y_floor`` by ``t_max``.
    The grid item is recorded either way; when it fails while a case
    passes, the note flags the positivity hypothesis as unrealized on the
    sampled grid.
    """
    sh = p.s * p.h
    items: dict[str, CheckItem] = {}
    items["sh_lt_1"] = CheckItem(1.0 - sh > 0.0, lhs=sh, rhs=1.0)
    items["k0_gt_half_k1"] = CheckItem(p.k0 > p.k1 / 2.0, lhs=p.k0, rhs=p.k1 / 2.0)
    structural = items["sh_lt_1"].ok and items["k0_gt_half_k1"].ok

    g2_k1 = g2_k0 = math.nan
    case_i = case_ii = False
    if structural:
        g2_k1 = predator_nullcline(p, p.k1)
        g2_k0 = predator_nullcline(p, p.k0)
        lamAb = p.lam - p.A * p.b
        case_i = lamAb < 0.0 and g2_k1 < 0.0 and g2_k0 > 0.0
        case_ii = lamAb > 0.0 and g2_k1 > 0.0 and g2_k0 < 0.0
        items["case_i_signs"] = CheckItem(
            case_i, detail=f"lam-Ab={lamAb!r}, nullcline(k1)={g2_k1!r}, nullcline(k0)={g2_k0!r}"
        )
        items["case_ii_signs"] = CheckItem(
            case_ii, detail=f"lam-Ab={lamAb!r}, nullcline(k1)={g2_k1!r}, nullcline(k0)={g2_k0!r}"
        )

    grid = trace_grid_certificate(p, build_D0(p, grid_n=grid_n))
    items["trace_all_positive"] = CheckItem(
        grid.verdict == ALL_POSITIVE, lhs=grid.minimum, rhs=0.0, detail=grid.verdict
    )

    case_pass = structural and (case_i or case_ii)
    report = CertificateReport(
        verdict="fail",
        checklist=items,
        minimum=grid.minimum,
        minimum_point=grid.minimum_point,
        maximum=grid.maximum,
        maximum_point=grid.maximum_point,
        extremal_value=grid.extremal_value,
        extremal_point=grid.extremal_point,
        note=_SAMPLING_NOTE,
    )
    if not case_pass:
        return report
    if not items["trace_all_positive"].ok:
        report.note = (
            "sign case passed but the grid positivity hypothesis is unrealized "
            "on the sampled inset grid; extinction corroborated by simulation only"
        )

    interior = interior_equilibria(p)
    items["unique_interior"] = CheckItem(len(interior) == 1, lhs=float(len(interior)), rhs=1.0)
    if len(interior) == 1:
        items["interior_unstable"] = CheckItem(
            not interior[0].cls.startswith("stable"), detail=interior[0].cls
        )

    n_extinct = 0
    worst_y = 0.0
    for init in _seeded_inits(p, n_inits, seed):
        traj = integrate(p, init, IntegratorConfig(t_end=t_max, rel_tol=1e-8, abs_tol=1e-12))
        yf = traj.final_state().y
        worst_y = max(worst_y, yf)
        if yf < y_floor:
            n_extinct += 1
    items["all_extinct"] = CheckItem(n_extinct == n_inits, lhs=float(n_extinct), rhs=float(n_inits))
    report.simulation = {
        "n_inits": n_inits,
        "n_extinct": n_extinct,
        "y_floor": y_floor,
        "worst_final_y": worst_y,
        "t_max": t_max,
        "seed": seed,
    }
    sim_ok = items["all_extinct"].ok and items["unique_interior"].ok and items.get(
        "interior_unstable", CheckItem(False)
    ).ok
    report.verdict = "pass" if sim_ok else "fail"
    return report
