"""Stable/unstable manifolds of the prey-only saddles and the connecting-orbit
locator.

Branches launch a small offset along the saddle's eigendirection and
integrate (backward for stable branches, forward for unstable) until they
cross the predator-balance section, leave the trapping box, or exceed an
arc-length cap.  The connecting orbit between the two prey-only saddles
is found by bisecting the attack coefficient on the sign of the gap
between the two branches' section crossing heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bifurcation import BifurcationPoint
from .equilibria import Equilibrium, classify_boundary
from .exceptions import BracketError, NoCrossing, NotSaddle
from .integrator import Event, EventSpec, IntegratorConfig, Trajectory, integrate
from .model import Parameters, State, jacobian, with_param

__all__ = [
    "ManifoldBranch",
    "GapSample",
    "saddle_eigendirections",
    "grow_manifold",
    "manifold_gap",
    "heteroclinic_find",
    "admissible_interval",
]


@dataclass
class ManifoldBranch:
    origin: Equilibrium
    eigendirection: tuple[float, float]
    side: int
    sense: str  # "stable" | "unstable"
    path: Trajectory
    crossing: Event | None
    exit_reason: str


@dataclass(frozen=True)
class GapSample:
    """Section-crossing heights of the two branches at one attack coefficient."""

    lam: float
    y1: float  # stable branch of the threshold saddle
    y2: float  # unstable branch of the carrying-capacity saddle
    x1: float
    x2: float

    @property
    def gap(self) -> float:
        return self.y1 - self.y2


def _eigvec(J, mu: float) -> tuple[float, float]:
    """Unit eigenvector of a real 2x2 for eigenvalue mu, y-component >= 0."""
    cand1 = (J.a12, mu - J.a11)
    cand2 = (mu - J.a22, J.a21)
    v = max(cand1, cand2, key=lambda t: t[0] * t[0] + t[1] * t[1])
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        raise NotSaddle("eigenvector degenerate")
    v = (v[0] / n, v[1] / n)
    if (abs(v[1]) > 1e-12 and v[1] < 0.0) or (abs(v[1]) <= 1e-12 and v[0] < 0.0):
        v = (-v[0], -v[1])
    return v


def saddle_eigendirections(
    p: Parameters, eq: Equilibrium
) -> tuple[tuple[float, float], tuple[float, float]]:
    """(stable, unstable) unit eigendirections of a hyperbolic saddle."""
    J = jacobian(p, eq.state)
    if J.det >= 0.0:
        raise NotSaddle(f"{eq.kind} at {eq.state} has det(J) = {J.det!r} >= 0")
    disc = math.sqrt(J.trace * J.trace - 4.0 * J.det)
    mu_minus = (J.trace - disc) / 2.0
    mu_plus = (J.trace + disc) / 2.0
    return _eigvec(J, mu_minus), _eigvec(J, mu_plus)


def _predator_balance(p: Parameters):
    def g(x, y):
        q = p.lam + p.A * y
        return q * x / (p.b + y + p.h * x * q) - p.s

    return g


def grow_manifold(
    p: Parameters,
    origin: Equilibrium | str,
    sense: str,
    side: int = +1,
    *,
    eps_rel: float = 1e-6,
    box_margin: float = 0.5,
    arc_cap_factor: float = 100.0,
    t_max: float = 1e4,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-13,
    require_crossing: bool = True,
) -> ManifoldBranch:
    """Grow one manifold branch of a prey-only saddle to the balance section.

    Launches at origin + (eps_rel * k1) * side * eigendirection and stops
    at the predator-balance section crossing, at the trapping-box faces
    (k1 + box_margin), or past arc length arc_cap_factor * k1.  With
    ``require_crossing`` a missed section raises NoCrossing carrying the
    partial branch and the exit reason.
    """
    if isinstance(origin, str):
        origin = classify_boundary(p, origin)
    if sense not in ("stable", "unstable"):
        raise ValueError(f"sense must be stable|unstable, got {sense!r}")
    stable_dir, unstable_dir = saddle_eigendirections(p, origin)
    direction = stable_dir if sense == "stable" else unstable_dir
    eps = eps_rel * p.k1
    launch = State(
        origin.state.x + eps * side * direction[0],
        origin.state.y + eps * side * direction[1],
    )
    balance = _predator_balance(p)
    crossing_dir = -1 if balance(launch.x, launch.y) > 0.0 else +1
    lid = p.k1 + box_margin
    floor = 1e-9 * p.k1
    events = [
        EventSpec(fn=balance, kind="section", direction=crossing_dir, terminal=True, label="predator_balance"),
        EventSpec(fn=lambda x, y: x - lid, kind="box_exit", direction=+1, terminal=True, label="x_lid"),
        EventSpec(fn=lambda x, y: y - lid, kind="box_exit", direction=+1, terminal=True, label="y_lid"),
        EventSpec(fn=lambda x, y: x - floor, kind="box_exit", direction=-1, terminal=True, label="x_floor"),
        EventSpec(fn=lambda x, y: y - floor, kind="box_exit", direction=-1, terminal=True, label="y_floor"),
    ]
    cfg = IntegratorConfig(
        t_end=t_max,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        direction="backward" if sense == "stable" else "forward",
    )
    path = integrate(p, launch, cfg, events=events, max_arc_length=arc_cap_factor * p.k1)
    ev = path.terminal_event
    if ev is not None and ev.kind == "section":
        return ManifoldBranch(origin, direction, side, sense, path, ev, "section")
    reason = ev.label if ev is not None else path.stop_reason
    branch = ManifoldBranch(origin, direction, side, sense, path, None, reason)
    if require_crossing:
        raise NoCrossing(
            f"{sense} branch of {origin.kind} never reached the balance section ({reason})",
            reason=reason,
            branch=branch,
        )
    return branch


def admissible_interval(p: Parameters) -> tuple[float, float]:
    """Attack-coefficient interval on which both prey-only states are saddles."""
    sh = p.s * p.h
    if not (1.0 - sh > 0.0 and p.k0 > 0.0):
        raise BracketError(
            f"saddle pair needs s*h < 1 and a strong Allee threshold (s*h={sh!r}, k0={p.k0!r})"
        )
    return p.s * p.b / (p.k1 * (1.0 - sh)), p.s * p.b / (p.k0 * (1.0 - sh))


def manifold_gap(p: Parameters, lam: float, **grow_kwargs) -> GapSample:
    """Crossing-height gap between the two branches at one attack coefficient.

    y1 is the stable branch of the threshold saddle grown backward; y2 the
    unstable branch of the carrying-capacity saddle grown forward; the gap
    is y1 - y2.
    """
    pl = with_param(p, "lam", lam)
    b1 = grow_manifold(pl, "E2", "stable", +1, **grow_kwargs)
    b2 = grow_manifold(pl, "E1", "unstable", +1, **grow_kwargs)
    return GapSample(
        lam=lam,
        y1=b1.crossing.state.y,
        y2=b2.crossing.state.y,
        x1=b1.crossing.state.x,
        x2=b2.crossing.state.x,
    )


def heteroclinic_find(
    p: Parameters,
    bracket: tuple[float, float],
    *,
    bracket_tol: float = 1e-6,
    **grow_kwargs,
) -> BifurcationPoint:
    """Attack coefficient at which the two saddle branches connect.

    Bisection on the sign of the crossing-height gap down to a bracket
    width of 1e-6.  The bracket must sit inside the admissible interval
    and the endpoint gaps must have opposite signs.
    """
    lam_lo, lam_hi = bracket
    adm = admissible_interval(p)
    if not (adm[0] < lam_lo < lam_hi < adm[1]):
        raise BracketError(
            f"bracket {bracket!r} not inside the admissible interval {adm!r}"
        )
    g_lo = manifold_gap(p, lam_lo, **grow_kwargs)
    g_hi = manifold_gap(p, lam_hi, **grow_kwargs)
    if (g_lo.gap < 0.0) == (g_hi.gap < 0.0):
        raise BracketError(
            f"gap has the same sign at both endpoints: {g_lo.gap!r}, {g_hi.gap!r}"
        )
    a, b = lam_lo, lam_hi
    ga = g_lo
    mid_sample = g_lo
    while b - a > bracket_tol:
        mid = 0.5 * (a + b)
        gm = manifold_gap(p, mid, **grow_kwargs)
        mid_sample = gm
        if (ga.gap < 0.0) != (gm.gap < 0.0):
            b = gm.lam
        else:
            a, ga = gm.lam, gm
    lam_tilde = 0.5 * (a + b)
    loc = State(
        0.5 * (mid_sample.x1 + mid_sample.x2), 0.5 * (mid_sample.y1 + mid_sample.y2)
    )
    diag = {
        "admissible_interval": adm,
        "final_bracket": (a, b),
        "gap_at_lo": g_lo.gap,
        "gap_at_hi": g_hi.gap,
        "last_sample": mid_sample,
        "crossing_mismatch": math.hypot(
            mid_sample.x1 - mid_sample.x2, mid_sample.y1 - mid_sample.y2
        ),
    }
    return BifurcationPoint("heteroclinic", "lambda", lam_tilde, loc, diag)
