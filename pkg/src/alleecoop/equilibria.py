"""Enumeration and stability classification of equilibria.

Boundary equilibria are the origin, the prey-only carrying-capacity state
and (under a strong Allee effect) the prey-only threshold state; their
eigenvalues come from upper-triangular Jacobians in closed form.  Interior
equilibria are located as bracketed roots of the equilibrium quartic on
the open prey interval, polished by Newton, and classified through the
analytic Jacobian.  A second, independent determinant/trace formula built
from the reduced-curve slopes cross-checks every interior classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError
from .model import (
    Parameters,
    State,
    equilibrium_quartic,
    equilibrium_quartic_coeffs,
    equilibrium_quartic_deriv,
    growth_balance_curve,
    jacobian,
    per_capita_partials,
    predator_nullcline,
    predator_nullcline_pole,
)

__all__ = [
    "Equilibrium",
    "STABLE_NODE",
    "STABLE_FOCUS",
    "SADDLE",
    "UNSTABLE_NODE",
    "UNSTABLE_FOCUS",
    "NON_HYPERBOLIC",
    "HYPERBOLICITY_TOL",
    "boundary_equilibria",
    "classify_boundary",
    "interior_equilibria",
    "classify_interior",
    "quartic_scale",
    "interior_prey_levels",
]

STABLE_NODE = "stable node"
STABLE_FOCUS = "stable focus"
SADDLE = "saddle"
UNSTABLE_NODE = "unstable node"
UNSTABLE_FOCUS = "unstable focus"
NON_HYPERBOLIC = "non-hyperbolic"

#: classification is refused below this |Re(eig)| relative to the Jacobian norm
HYPERBOLICITY_TOL = 1e-9

#: absolute tolerance on the boundary trichotomy expressions
_BOUNDARY_TOL = 1e-10

_SCAN_INTERVALS = 2048


@dataclass(frozen=True)
class Equilibrium:
    """A located fixed point with spectrum and stability class."""

    state: State
    kind: str  # "E0" | "E1" | "E2" | "interior"
    eigenvalues: tuple[complex, complex]
    cls: str
    index: int | None = None  # ascending-x position among interior equilibria
    multiplicity: int = 1  # 2 for a tangency (double) root
    degenerate: bool = False  # E0 when the Allee threshold sits at zero


def _classify_eigenvalues(eigs: tuple[complex, complex], scale: float) -> str:
    tol = HYPERBOLICITY_TOL * max(scale, 1e-300)
    if min(abs(e.real) for e in eigs) < tol:
        return NON_HYPERBOLIC
    re0, re1 = eigs[0].real, eigs[1].real
    if re0 < 0.0 < re1 or re1 < 0.0 < re0:
        return SADDLE
    focus = eigs[0].imag != 0.0
    if re0 < 0.0:
        return STABLE_FOCUS if focus else STABLE_NODE
    return UNSTABLE_FOCUS if focus else UNSTABLE_NODE


def _ordered(e1: complex, e2: complex) -> tuple[complex, complex]:
    return (e1, e2) if (e1.real, e1.imag) <= (e2.real, e2.imag) else (e2, e1)


def classify_boundary(p: Parameters, which: str) -> Equilibrium:
    """One boundary equilibrium with its closed-form spectrum.

    The predator-direction eigenvalue at the prey-only states is
    lam*x/(b + h*x*lam) - s; within 1e-10 of zero the state is reported
    non-hyperbolic rather than guessed.
    """
    if which == "E0":
        e_prey, e_pred = -p.r1 * p.k0, -p.s
        st = State(0.0, 0.0)
        if abs(e_prey) <= _BOUNDARY_TOL:
            cls = NON_HYPERBOLIC
        elif p.k0 > 0.0:
            cls = STABLE_NODE
        else:
            cls = SADDLE
        return Equilibrium(
            st, "E0", _ordered(complex(e_prey), complex(e_pred)), cls,
            degenerate=(p.k0 == 0.0),
        )
    if which == "E1":
        x = p.k1
        e_prey = p.r1 * (p.k0 - p.k1)  # always negative since k0 < k1
        gate = p.lam * x / (p.b + p.h * x * p.lam) - p.s
        st = State(x, 0.0)
        if abs(gate) <= _BOUNDARY_TOL:
            cls = NON_HYPERBOLIC
        elif gate < 0.0:
            cls = STABLE_NODE
        else:
            cls = SADDLE
        return Equilibrium(st, "E1", _ordered(complex(e_prey), complex(gate)), cls)
    if which == "E2":
        if p.k0 <= 0.0:
            raise DomainError(f"E2 exists only for a strong Allee threshold (k0 > 0), got k0={p.k0!r}")
        x = p.k0
        e_prey = p.r1 * p.k0 * (1.0 - p.k0 / p.k1)  # always positive
        gate = p.lam * x / (p.b + p.h * x * p.lam) - p.s
        st = State(x, 0.0)
        if abs(gate) <= _BOUNDARY_TOL:
            cls = NON_HYPERBOLIC
        elif gate < 0.0:
            cls = SADDLE
        else:
            cls = UNSTABLE_NODE
        return Equilibrium(st, "E2", _ordered(complex(e_prey), complex(gate)), cls)
    raise ValueError(f"unknown boundary equilibrium {which!r}")


def boundary_equilibria(p: Parameters) -> list[Equilibrium]:
    """E0 and E1 always; E2 additionally when the Allee threshold is positive.

    At k0 == 0 the threshold state coincides with the origin: two
    equilibria are returned and E0 carries the ``degenerate`` flag.
    """
    out = [classify_boundary(p, "E0"), classify_boundary(p, "E1")]
    if p.k0 > 0.0:
        out.append(classify_boundary(p, "E2"))
    return out


def quartic_scale(p: Parameters, lam: float | None = None) -> float:
    """Magnitude scale of the equilibrium quartic over the prey interval."""
    coeffs = equilibrium_quartic_coeffs(p, lam)
    return max(abs(c) * p.k1**i for i, c in enumerate(coeffs))


def interior_prey_levels(p: Parameters, lam: float | None = None) -> list[tuple[float, int]]:
    """Prey levels of interior equilibria as (x, multiplicity) pairs.

    Sign-scan over 2048 subintervals of the open admissible interval,
    bisection, then Newton polish to |G| < 1e-12 * scale; double roots are
    caught at critical points of G and by the |G'| < 1e-6 * scale test;
    near-duplicates within 1e-8 merge.  Candidates must have a positive
    balance-curve level and sit away from the nullcline pole.
    """
    lo = max(0.0, p.k0) + 1e-12 * p.k1
    hi = p.k1 * (1.0 - 1e-12)
    if lo >= hi:
        return []
    scale = quartic_scale(p, lam)
    gtol = 1e-12 * scale
    dtol = 1e-6 * scale / p.k1

    xs = np.linspace(lo, hi, _SCAN_INTERVALS + 1)
    gs = equilibrium_quartic(p, xs, lam)

    def refine(a: float, b: float, ga: float) -> float:
        for _ in range(80):
            m = 0.5 * (a + b)
            gm = equilibrium_quartic(p, m, lam)
            if gm == 0.0:
                return m
            if (ga < 0.0) != (gm < 0.0):
                b = m
            else:
                a, ga = m, gm
            if b - a < 1e-15 * p.k1:
                break
        x = 0.5 * (a + b)
        for _ in range(8):  # Newton polish
            g = equilibrium_quartic(p, x, lam)
            if abs(g) < gtol:
                break
            dg = equilibrium_quartic_deriv(p, x, lam)
            if dg == 0.0:
                break
            step = g / dg
            x -= step
            if abs(step) < 1e-16 * p.k1:
                break
        return min(max(x, lo), hi)

    roots: list[float] = []
    for i in range(_SCAN_INTERVALS):
        if gs[i] == 0.0:
            roots.append(float(xs[i]))
        elif (gs[i] < 0.0) != (gs[i + 1] < 0.0):
            roots.append(refine(float(xs[i]), float(xs[i + 1]), float(gs[i])))

    # tangency roots leave no sign change: check critical points of G
    dgs = equilibrium_quartic_deriv(p, xs, lam)
    for i in range(_SCAN_INTERVALS):
        if (dgs[i] < 0.0) != (dgs[i + 1] < 0.0):
            a, b = float(xs[i]), float(xs[i + 1])
            da = float(dgs[i])
            for _ in range(80):
                m = 0.5 * (a + b)
                dm = equilibrium_quartic_deriv(p, m, lam)
                if (da < 0.0) != (dm < 0.0):
                    b = m
                else:
                    a, da = m, dm
            xc = 0.5 * (a + b)
            if abs(equilibrium_quartic(p, xc, lam)) < gtol:
                roots.append(xc)

    roots.sort()
    merged: list[float] = []
    for x in roots:
        if merged and abs(x - merged[-1]) <= 1e-8:
            continue
        merged.append(x)

    pole = predator_nullcline_pole(p)
    out: list[tuple[float, int]] = []
    for x in merged:
        if pole is not None and abs(x - pole) <= 1e-9 * p.k1:
            continue
        if growth_balance_curve(p, x) <= 0.0:
            continue
        mult = 2 if abs(equilibrium_quartic_deriv(p, x, lam)) < dtol else 1
        out.append((x, mult))
    return out


def classify_interior(p: Parameters, eq: Equilibrium) -> Equilibrium:
    """Fill in the stability class of an interior equilibrium.

    Classification comes from the analytic Jacobian's eigenvalues.  The
    determinant and trace are recomputed through the independent
    reduced-curve route det = x*y*u_y*v_y*(y2' - y1') and
    tr = x*u_x + y*v_y (slopes from the implicit function theorem) and
    must agree with the Jacobian to 1e-8 relative; disagreement means the
    state is not an equilibrium to working precision.
    """
    x, y = eq.state.x, eq.state.y
    J = jacobian(p, eq.state)
    ux, uy, vx, vy = per_capita_partials(p, x, y)
    dy1dx = -ux / uy
    dy2dx = -vx / vy
    det2 = x * y * uy * vy * (dy2dx - dy1dx)
    tr2 = x * ux + y * vy
    scale2 = max(J.norm**2, 1e-300)
    if abs(det2 - J.det) > 1e-8 * max(abs(J.det), abs(det2), 1e-4 * scale2):
        raise ValueError(
            f"determinant cross-check failed at ({x!r}, {y!r}): "
            f"jacobian {J.det!r} vs reduced-curve {det2!r} (not an equilibrium?)"
        )
    if abs(tr2 - J.trace) > 1e-8 * max(abs(J.trace), abs(tr2), 1e-4 * J.norm):
        raise ValueError(
            f"trace cross-check failed at ({x!r}, {y!r}): "
            f"jacobian {J.trace!r} vs reduced-curve {tr2!r}"
        )
    eigs = J.eigenvalues
    cls = NON_HYPERBOLIC if eq.multiplicity > 1 else _classify_eigenvalues(eigs, J.norm)
    return replace(eq, eigenvalues=eigs, cls=cls)


def interior_equilibria(p: Parameters) -> list[Equilibrium]:
    """All interior equilibria, ascending in prey level, classified."""
    out: list[Equilibrium] = []
    for idx, (x, mult) in enumerate(interior_prey_levels(p)):
        y = growth_balance_curve(p, x)
        eq = Equilibrium(
            state=State(x, y),
            kind="interior",
            eigenvalues=(complex(math.nan), complex(math.nan)),
            cls=NON_HYPERBOLIC,
            index=idx,
            multiplicity=mult,
        )
        out.append(classify_interior(p, eq))
    return out
