"""Codimension-1 bifurcation locators with eigenvector-projected diagnostics.

Critical parameter values come from closed forms (boundary exchanges of
stability), from bisection on interior-root counts followed by a 2-D
Newton polish on the quartic and its derivative (fold of interior
equilibria), or from bisection on the tracked equilibrium's trace (onset
of oscillation in the death rate).  Degeneracy diagnostics project
parameter- and state-derivatives of the field onto the left/right null
eigenvectors; parameter derivatives are taken by central differences, and
the null vectors are computed numerically from the analytic Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .equilibria import (
    classify_boundary,
    interior_equilibria,
    interior_prey_levels,
    quartic_scale,
)
from .exceptions import BracketError, BranchLost, GateError, NotSemisimple
from .integrator import PeriodicOrbit, detect_limit_cycle
from .model import (
    Parameters,
    State,
    equilibrium_quartic,
    equilibrium_quartic_coeffs,
    equilibrium_quartic_deriv,
    growth_balance_curve,
    jacobian,
    second_derivs,
    vector_field_xy,
    with_param,
)

__all__ = [
    "BifurcationPoint",
    "transcritical_lambda",
    "sotomayor_transcritical",
    "saddle_node_lambda",
    "hopf_s",
    "transcritical_k0_origin",
]

_ZERO_EIG_REL = 1e-8
_OTHER_EIG_MIN = 1e-6
_PROJ_TOL = 1e-8


@dataclass
class BifurcationPoint:
    """A located codimension-1 bifurcation with its diagnostics checklist."""

    kind: str  # transcritical | saddle_node | hopf | transcritical_on_cycle | heteroclinic
    param: str  # lambda | s | k0
    critical_value: float
    location: State
    diagnostics: dict


def _null_vectors(J) -> tuple[tuple[float, float], tuple[float, float]]:
    """Right and left null vectors of a near-singular 2x2, with W.V = 1.

    V is unit length with a sign convention (positive y-component when it
    has one); defective zero eigenvalues surface as W.V ~ 0.
    """
    rows = ((J.a11, J.a12), (J.a21, J.a22))
    r = max(rows, key=lambda t: t[0] * t[0] + t[1] * t[1])
    v1, v2 = -r[1], r[0]
    nv = math.hypot(v1, v2)
    if nv == 0.0:
        raise NotSemisimple("Jacobian is identically zero; null direction undefined")
    v1, v2 = v1 / nv, v2 / nv
    if (abs(v2) > 1e-12 and v2 < 0.0) or (abs(v2) <= 1e-12 and v1 < 0.0):
        v1, v2 = -v1, -v2
    cols = ((J.a11, J.a21), (J.a12, J.a22))
    c = max(cols, key=lambda t: t[0] * t[0] + t[1] * t[1])
    w1, w2 = -c[1], c[0]
    nw = math.hypot(w1, w2)
    w1, w2 = w1 / nw, w2 / nw
    dot = w1 * v1 + w2 * v2
    if abs(dot) < 1e-8:
        raise NotSemisimple(f"zero eigenvalue is defective (|W.V| = {abs(dot):.3e})")
    return (v1, v2), (w1 / dot, w2 / dot)


def _fd_field_param(p: Parameters, st: State, param: str, value: float):
    """Central difference of the vector field in one parameter."""
    step = 1e-6 * max(1.0, abs(value))
    f_hi = vector_field_xy(with_param(p, param, value + step), st.x, st.y)
    f_lo = vector_field_xy(with_param(p, param, value - step), st.x, st.y)
    return ((f_hi[0] - f_lo[0]) / (2.0 * step), (f_hi[1] - f_lo[1]) / (2.0 * step))


def _fd_jacobian_param(p: Parameters, st: State, param: str, value: float):
    """Central difference of the Jacobian entries in one parameter."""
    step = 1e-6 * max(1.0, abs(value))
    J_hi = jacobian(with_param(p, param, value + step), st)
    J_lo = jacobian(with_param(p, param, value - step), st)
    inv = 1.0 / (2.0 * step)
    return (
        (J_hi.a11 - J_lo.a11) * inv,
        (J_hi.a12 - J_lo.a12) * inv,
        (J_hi.a21 - J_lo.a21) * inv,
        (J_hi.a22 - J_lo.a22) * inv,
    )


def _quadratic_form(p: Parameters, st: State, v: tuple[float, float]):
    """D2f(V, V): second derivative of the field applied twice to V."""
    d2 = second_derivs(p, st)
    v1, v2 = v
    return (
        d2.f1xx * v1 * v1 + 2.0 * d2.f1xy * v1 * v2 + d2.f1yy * v2 * v2,
        d2.f2xx * v1 * v1 + 2.0 * d2.f2xy * v1 * v2 + d2.f2yy * v2 * v2,
    )


def sotomayor_transcritical(
    p: Parameters, eq: State, param: str, value: float
) -> dict:
    """Eigenvector-projected degeneracy tests at a zero-eigenvalue point.

    Requires a simple zero eigenvalue (|eig| < 1e-8 * |J|) with the other
    eigenvalue's real part at least 1e-6 in magnitude.  Returns the
    projections W.f_mu, W.[Df_mu V] and W.[D2f(V,V)] together with
    transcritical/fold verdict booleans (the transcritical pattern needs
    the first ~ 0 and the other two bounded away from zero).
    """
    pc = with_param(p, param, value)
    J = jacobian(pc, eq)
    eigs = J.eigenvalues
    scale = max(J.norm, 1e-300)
    small = [e for e in eigs if abs(e) < _ZERO_EIG_REL * scale]
    if len(small) == 0:
        raise GateError(
            f"no zero eigenvalue at ({eq.x!r}, {eq.y!r}) for {param}={value!r}: {eigs!r}"
        )
    if len(small) == 2:
        raise NotSemisimple(f"double zero eigenvalue at ({eq.x!r}, {eq.y!r}): {eigs!r}")
    other = eigs[0] if abs(eigs[1]) < _ZERO_EIG_REL * scale else eigs[1]
    if abs(other.real) <= _OTHER_EIG_MIN:
        raise GateError(f"second eigenvalue too close to the imaginary axis: {other!r}")
    V, W = _null_vectors(J)
    f_mu = _fd_field_param(pc, eq, param, value)
    dJ = _fd_jacobian_param(pc, eq, param, value)
    dfmu_v = (dJ[0] * V[0] + dJ[1] * V[1], dJ[2] * V[0] + dJ[3] * V[1])
    d2f_vv = _quadratic_form(pc, eq, V)
    w_f_mu = W[0] * f_mu[0] + W[1] * f_mu[1]
    w_dfmu_v = W[0] * dfmu_v[0] + W[1] * dfmu_v[1]
    w_d2f_vv = W[0] * d2f_vv[0] + W[1] * d2f_vv[1]
    return {
        "eigenvalues": eigs,
        "V": V,
        "W": W,
        "w_f_mu": w_f_mu,
        "w_dfmu_v": w_dfmu_v,
        "w_d2f_vv": w_d2f_vv,
        "transcritical_ok": abs(w_f_mu) < _PROJ_TOL
        and abs(w_dfmu_v) > _PROJ_TOL
        and abs(w_d2f_vv) > _PROJ_TOL,
        "saddle_node_ok": abs(w_f_mu) > _PROJ_TOL and abs(w_d2f_vv) > _PROJ_TOL,
    }


def transcritical_lambda(p: Parameters, which: str) -> BifurcationPoint:
    """Attack-coefficient value where a prey-only state exchanges stability.

    Closed form s*b/(k*(1 - s*h)) with k the prey level of E1 or E2.
    Cross-validated by the interior-equilibrium count change across the
    critical value and by the projected degeneracy pattern.
    """
    sh = p.s * p.h
    if 1.0 - sh <= 0.0:
        raise GateError(f"requires s*h < 1, got s*h = {sh!r}")
    if which == "E1":
        k = p.k1
    elif which == "E2":
        if p.k0 <= 0.0:
            raise GateError(f"E2 requires a strong Allee threshold, got k0 = {p.k0!r}")
        k = p.k0
    else:
        raise ValueError(f"which must be E1|E2, got {which!r}")
    lam_c = p.s * p.b / (k * (1.0 - sh))
    eq = State(k, 0.0)
    diag = sotomayor_transcritical(p, eq, "lambda", lam_c)
    if abs(diag["w_dfmu_v"]) <= 1e-10 or abs(diag["w_d2f_vv"]) <= 1e-10:
        raise GateError(
            f"nondegeneracy projections vanish at {which}: "
            f"w_dfmu_v={diag['w_dfmu_v']!r}, w_d2f_vv={diag['w_d2f_vv']!r}"
        )
    delta = 1e-3
    n_lo = len(interior_prey_levels(p, lam=lam_c - delta))
    n_hi = len(interior_prey_levels(p, lam=lam_c + delta))
    diag["count_below"] = n_lo
    diag["count_above"] = n_hi
    diag["count_change"] = abs(n_hi - n_lo)
    diag["class_below"] = classify_boundary(with_param(p, "lam", lam_c - delta), which).cls
    diag["class_above"] = classify_boundary(with_param(p, "lam", lam_c + delta), which).cls
    return BifurcationPoint("transcritical", "lambda", lam_c, eq, diag)


def _count_roots(p: Parameters, lam: float) -> list[tuple[float, int]]:
    return interior_prey_levels(p, lam=lam)


def saddle_node_lambda(p: Parameters, bracket: tuple[float, float]) -> BifurcationPoint:
    """Attack-coefficient value where two interior equilibria merge.

    Bisection on the interior-root count over the bracket (the endpoint
    counts must differ by two), then 2-D Newton on (G, dG/dx) = 0 from
    the midpoint of the merging root pair.
    """
    lam_a, lam_b = bracket
    roots_a, roots_b = _count_roots(p, lam_a), _count_roots(p, lam_b)
    if abs(len(roots_a) - len(roots_b)) != 2:
        raise BracketError(
            f"endpoint root counts {len(roots_a)} and {len(roots_b)} do not differ by 2"
        )
    two_side = roots_a if len(roots_a) > len(roots_b) else roots_b
    pair = sorted(x for x, _ in two_side)[-2:] if len(two_side) >= 2 else None
    lo, hi = lam_a, lam_b
    n_lo = len(roots_a)
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        roots_m = _count_roots(p, mid)
        if len(roots_m) == n_lo:
            lo = mid
            side_roots = roots_m
        else:
            hi = mid
            side_roots = roots_m
        if len(side_roots) >= 2:
            xs = sorted(x for x, _ in side_roots)
            # the merging pair is the closest adjacent pair
            gaps = [(xs[i + 1] - xs[i], i) for i in range(len(xs) - 1)]
            _, i0 = min(gaps)
            pair = (xs[i0], xs[i0 + 1])
    lam_star = 0.5 * (lo + hi)
    if pair is None:
        raise BracketError("never observed the merging root pair inside the bracket")
    x = 0.5 * (pair[0] + pair[1])
    u = 1.0 - p.s * p.h

    for _ in range(80):
        g = equilibrium_quartic(p, x, lam_star)
        gx = equilibrium_quartic_deriv(p, x, lam_star)
        c0, c1, c2, c3, c4 = equilibrium_quartic_coeffs(p, lam_star)
        gxx = 2.0 * c2 + x * (6.0 * c3 + x * 12.0 * c4)
        g_lam = -u * x
        gx_lam = -u
        # solve [[gx, g_lam], [gxx, gx_lam]] @ [dx, dlam] = [g, gx] by Cramer
        det = gx * gx_lam - g_lam * gxx
        if det == 0.0:
            break
        dx = (g * gx_lam - g_lam * gx) / det
        dlam = (gx * gx - g * gxx) / det
        x -= dx
        lam_star -= dlam
        if abs(dx) < 1e-16 * p.k1 and abs(dlam) < 1e-16 * max(1.0, abs(lam_star)):
            break

    scale = quartic_scale(p, lam_star)
    g_res = abs(equilibrium_quartic(p, x, lam_star))
    gx_res = abs(equilibrium_quartic_deriv(p, x, lam_star))
    y = growth_balance_curve(p, x)
    loc = State(x, y)
    diag = sotomayor_transcritical(p, loc, "lambda", lam_star)
    diag.update(
        {
            "g_residual": g_res,
            "gx_residual": gx_res,
            "quartic_scale": scale,
            "lam_minus_Ab": lam_star - p.A * p.b,
            "count_at_bracket": (len(roots_a), len(roots_b)),
            "final_bracket": (lo, hi),
        }
    )
    return BifurcationPoint("saddle_node", "lambda", lam_star, loc, diag)


def _tracked_level(p: Parameters, s: float, x_guess: float | None, branch: int) -> float:
    ps = with_param(p, "s", s)
    levels = [x for x, _ in interior_prey_levels(ps)]
    if not levels:
        raise BranchLost(f"no interior equilibrium at s = {s!r}")
    if x_guess is None:
        if branch >= len(levels):
            raise BranchLost(
                f"branch index {branch} out of range: {len(levels)} interior equilibria at s = {s!r}"
            )
        return levels[branch]
    x = min(levels, key=lambda v: abs(v - x_guess))
    if abs(x - x_guess) > 0.1 * p.k1:
        raise BranchLost(
            f"tracked equilibrium jumped from {x_guess!r} to {x!r} at s = {s!r}"
        )
    return x


def _branch_trace(p: Parameters, s: float, x: float) -> tuple[float, float]:
    ps = with_param(p, "s", s)
    st = State(x, growth_balance_curve(ps, x))
    J = jacobian(ps, st)
    return J.trace, J.det


def hopf_s(p: Parameters, branch: int, bracket: tuple[float, float]) -> BifurcationPoint:
    """Death-rate value where the tracked interior equilibrium's trace vanishes.

    The equilibrium is re-solved at each probed s and matched by nearest
    prey level (jumps beyond 0.1*k1 raise BranchLost).  Bisection runs on
    the trace sign until |trace| < 1e-10; the determinant must stay
    positive along the branch.
    """
    s_lo, s_hi = bracket
    n_walk = 33
    xs: list[float] = []
    trs: list[float] = []
    dets: list[float] = []
    x_guess: float | None = None
    svals = [s_lo + (s_hi - s_lo) * i / (n_walk - 1) for i in range(n_walk)]
    for s in svals:
        x_guess = _tracked_level(p, s, x_guess, branch)
        tr, det = _branch_trace(p, s, x_guess)
        xs.append(x_guess)
        trs.append(tr)
        dets.append(det)
    if min(dets) <= 0.0:
        raise BracketError(
            f"determinant not positive along the branch (min {min(dets)!r}); not an oscillation onset"
        )
    k = next((i for i in range(n_walk - 1) if (trs[i] < 0.0) != (trs[i + 1] < 0.0)), None)
    if k is None:
        raise BracketError(f"trace does not change sign on [{s_lo!r}, {s_hi!r}]")
    a, b = svals[k], svals[k + 1]
    tr_a = trs[k]
    x_guess = xs[k]
    s_star, x_star, tr_star = a, xs[k], tr_a
    for _ in range(200):
        mid = 0.5 * (a + b)
        x_guess = _tracked_level(p, mid, x_guess, branch)
        tr_m, det_m = _branch_trace(p, mid, x_guess)
        s_star, x_star, tr_star = mid, x_guess, tr_m
        if abs(tr_m) < 1e-10:
            break
        if (tr_a < 0.0) != (tr_m < 0.0):
            b = mid
        else:
            a, tr_a = mid, tr_m
    ps = with_param(p, "s", s_star)
    loc = State(x_star, growth_balance_curve(ps, x_star))
    J = jacobian(ps, loc)
    eigs = J.eigenvalues
    # frozen-state sensitivity of the trace to s (the death term only)
    ds = 1e-6
    tr_hi = jacobian(with_param(p, "s", s_star + ds), loc).trace
    tr_lo = jacobian(with_param(p, "s", s_star - ds), loc).trace
    dtr_ds_frozen = (tr_hi - tr_lo) / (2.0 * ds)
    diag = {
        "trace": J.trace,
        "det": J.det,
        "eigenvalues": eigs,
        "omega": math.sqrt(J.det) if J.det > 0.0 else math.nan,
        "imag_vs_sqrt_det": abs(abs(eigs[0].imag) - math.sqrt(max(J.det, 0.0))),
        "dtrace_ds_frozen": dtr_ds_frozen,
        "dtrace_ds_branch": (trs[k + 1] - trs[k]) / (svals[k + 1] - svals[k]),
        "branch_prey_level": x_star,
        "det_min_on_branch": min(dets),
    }
    return BifurcationPoint("hopf", "s", s_star, loc, diag)


def transcritical_k0_origin(
    p: Parameters,
    *,
    cycle_seed: State | None = None,
    transient: float = 400.0,
    scan_time: float = 1600.0,
) -> BifurcationPoint:
    """Degeneracy of the origin as the Allee threshold crosses zero.

    Evaluates the projected conditions at the origin with threshold
    frozen at zero (V = W = (1, 0); the projections come out as -r1 and
    2*r1), then runs cycle detection at the given threshold (``p.k0``)
    and attaches the outcome: a crossing to a negative threshold can
    hand the dynamics to a large attracting loop.
    """
    p0 = with_param(p, "k0", 0.0)
    origin = State(0.0, 0.0)
    J = jacobian(p0, origin)
    V = W = (1.0, 0.0)
    f_mu = _fd_field_param(p0, origin, "k0", 0.0)
    dJ = _fd_jacobian_param(p0, origin, "k0", 0.0)
    w_f_mu = W[0] * f_mu[0] + W[1] * f_mu[1]
    w_dfmu_v = W[0] * (dJ[0] * V[0] + dJ[1] * V[1]) + W[1] * (dJ[2] * V[0] + dJ[3] * V[1])
    d2f_vv = _quadratic_form(p0, origin, V)
    w_d2f_vv = W[0] * d2f_vv[0] + W[1] * d2f_vv[1]
    seed = cycle_seed if cycle_seed is not None else State(2.0 * p.k1 / 3.0, p.k1 / 3.0)
    orbit: PeriodicOrbit | None = detect_limit_cycle(
        p, seed, transient=transient, scan_time=scan_time
    )
    diag = {
        "eigenvalues": J.eigenvalues,
        "V": V,
        "W": W,
        "w_f_mu": w_f_mu,
        "w_dfmu_v": w_dfmu_v,
        "w_d2f_vv": w_d2f_vv,
        "transcritical_ok": abs(w_f_mu) < _PROJ_TOL
        and abs(w_dfmu_v) > _PROJ_TOL
        and abs(w_d2f_vv) > _PROJ_TOL,
        "k0_probed": p.k0,
        "cycle": orbit,
    }
    return BifurcationPoint("transcritical_on_cycle", "k0", 0.0, origin, diag)
