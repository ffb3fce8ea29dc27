"""Closed-form expressions for the cooperative-hunting predator-prey model.

State is a point (x, y) of prey and predator densities.  The prey grows
cubically with carrying capacity ``k1`` and Allee threshold ``k0`` (strong
Allee effect for k0 > 0, weak for k0 < 0).  Predation follows a saturating
response whose attack coefficient ``lam + A*y`` increases with predator
density (hunting cooperation); ``b`` is the half-saturation constant and
``h`` the handling time.  The predator converts intake one-to-one and dies
at constant per-capita rate ``s``:

    dx/dt = r1*x*(1 - x/k1)*(x - k0) - (lam + A*y)*x*y / d(x, y)
    dy/dt = (lam + A*y)*x*y / d(x, y) - s*y
    d(x, y) = b + y + h*x*(lam + A*y)

Everything here is a pure function of its arguments; all values are plain
floats (or numpy arrays where noted) and safe to share across threads.
The quartic whose positive roots give interior-equilibrium prey levels is
built directly from the two reduced equilibrium curves, so the identity
``quartic(x) == (balance(x) - nullcline(x)) * (s + A*(s*h - 1)*x)`` holds
by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .exceptions import DomainError, PoleError

__all__ = [
    "Parameters",
    "State",
    "Jacobian2",
    "SecondDerivs",
    "prey_growth",
    "functional_response",
    "vector_field",
    "vector_field_xy",
    "per_capita_rates",
    "jacobian",
    "second_derivs",
    "per_capita_partials",
    "weighted_trace",
    "growth_balance_curve",
    "predator_nullcline",
    "predator_nullcline_pole",
    "prey_nullcline",
    "equilibrium_quartic_coeffs",
    "equilibrium_quartic",
    "equilibrium_quartic_deriv",
    "with_param",
]


@dataclass(frozen=True)
class Parameters:
    """The eight model constants.

    r1:  intrinsic prey growth rate (> 0)
    k1:  prey carrying capacity (> 0, and > k0)
    k0:  Allee threshold (any sign; > 0 strong, < 0 weak, 0 degenerate)
    lam: baseline attack coefficient (> 0)
    A:   cooperation gain coefficient (> 0)
    b:   half-saturation constant (> 0)
    h:   handling time (> 0)
    s:   predator per-capita death rate (> 0)
    """

    r1: float
    k1: float
    k0: float
    lam: float
    A: float
    b: float
    h: float
    s: float

    def __post_init__(self):
        for name in ("r1", "k1", "lam", "A", "b", "h", "s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"parameter {name} must be finite and > 0, got {v!r}")
        if not math.isfinite(self.k0):
            raise ValueError(f"parameter k0 must be finite, got {self.k0!r}")
        if self.k1 <= max(self.k0, 0.0):
            raise ValueError(
                f"k1 must exceed max(k0, 0): k1={self.k1!r}, k0={self.k0!r}"
            )

    def regime(self) -> str:
        """Allee regime: 'strong' (k0 > 0), 'weak' (k0 < 0) or 'degenerate'."""
        if self.k0 > 0.0:
            return "strong"
        if self.k0 < 0.0:
            return "weak"
        return "degenerate"


def with_param(p: Parameters, name: str, value: float) -> Parameters:
    """Copy ``p`` with one field replaced ('lambda' accepted for 'lam')."""
    if name == "lambda":
        name = "lam"
    return replace(p, **{name: value})


@dataclass(frozen=True)
class State:
    """A point of the phase plane: prey density x >= 0, predator density y >= 0."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"state must be finite, got ({self.x!r}, {self.y!r})")
        if self.x < 0.0 or self.y < 0.0:
            # tolerate rounding dust from integration near the axes
            if self.x >= -1e-12 and self.y >= -1e-12:
                object.__setattr__(self, "x", max(self.x, 0.0))
                object.__setattr__(self, "y", max(self.y, 0.0))
            else:
                raise ValueError(f"state must be non-negative, got ({self.x!r}, {self.y!r})")


@dataclass(frozen=True)
class Jacobian2:
    """Derivative of the full vector field at a state, with spectral helpers."""

    a11: float
    a12: float
    a21: float
    a22: float

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def norm(self) -> float:
        """Frobenius norm, the scale used by hyperbolicity tolerances."""
        return math.sqrt(self.a11**2 + self.a12**2 + self.a21**2 + self.a22**2)

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        """Both eigenvalues, ordered by (real part, imaginary part)."""
        tr, det = self.trace, self.det
        disc = tr * tr - 4.0 * det
        if disc >= 0.0:
            sq = math.sqrt(disc)
            pair = (complex((tr - sq) / 2.0), complex((tr + sq) / 2.0))
        else:
            sq = math.sqrt(-disc) / 2.0
            pair = (complex(tr / 2.0, -sq), complex(tr / 2.0, sq))
        return pair


@dataclass(frozen=True)
class SecondDerivs:
    """Second partials of the full vector field (f1, f2) at a state.

    The interaction term enters f1 and f2 with opposite signs and the prey
    growth term is y-independent, so f2yy == -f1yy and f2xy == -f1xy hold
    exactly (they are stored as literal negations).
    """

    f1xx: float
    f2xx: float
    f1yy: float
    f2yy: float
    f1xy: float
    f2xy: float


# ---------------------------------------------------------------------------
# elementary pieces


def prey_growth(p: Parameters, x):
    """Cubic prey growth rate r1*x*(1 - x/k1)*(x - k0); zero at 0, k0, k1."""
    return p.r1 * x * (1.0 - x / p.k1) * (x - p.k0)


def functional_response(p: Parameters, x, y):
    """Per-predator consumption rate (lam + A*y)*x / (b + y + h*x*(lam + A*y)).

    At y = 0 this reduces to the plain saturating form lam*x/(b + h*lam*x).
    Accepts numpy arrays elementwise.
    """
    q = p.lam + p.A * y
    return q * x / (p.b + y + p.h * x * q)


def vector_field_xy(p: Parameters, x, y):
    """Right-hand side (dx/dt, dy/dt) from raw coordinates (array-friendly)."""
    q = p.lam + p.A * y
    consumption = q * x * y / (p.b + y + p.h * x * q)
    return prey_growth(p, x) - consumption, consumption - p.s * y


def vector_field(p: Parameters, st: State) -> tuple[float, float]:
    """Right-hand side (dx/dt, dy/dt) at a state."""
    return vector_field_xy(p, st.x, st.y)


def per_capita_rates(p: Parameters, st: State) -> tuple[float, float]:
    """Per-capita growth rates (dx/dt / x, dy/dt / y).

    Undefined on the axes: raises DomainError when x == 0 or y == 0.
    """
    if st.x == 0.0 or st.y == 0.0:
        raise DomainError(f"per-capita rates undefined at ({st.x}, {st.y})")
    q = p.lam + p.A * st.y
    d = p.b + st.y + p.h * st.x * q
    f1 = p.r1 * (1.0 - st.x / p.k1) * (st.x - p.k0) - q * st.y / d
    f2 = q * st.x / d - p.s
    return f1, f2


# ---------------------------------------------------------------------------
# derivatives


def jacobian(p: Parameters, st: State) -> Jacobian2:
    """Analytic Jacobian of the full vector field at a state."""
    x, y = st.x, st.y
    q = p.lam + p.A * y
    d = p.b + y + p.h * x * q
    d2 = d * d
    # numerator of -d(f1)/dy and +d(f2)/dy (before the -s death term)
    n_y = p.lam * p.b + 2.0 * p.A * p.b * y + p.A * y * y + p.h * x * q * q
    predation_x = y * (p.b + y) * q / d2
    a11 = (
        p.r1 * (1.0 - x / p.k1) * (x - p.k0)
        + p.r1 * x * (1.0 + p.k0 / p.k1 - 2.0 * x / p.k1)
        - predation_x
    )
    a12 = -x * n_y / d2
    a21 = predation_x
    a22 = x * n_y / d2 - p.s
    return Jacobian2(a11, a12, a21, a22)


def second_derivs(p: Parameters, st: State) -> SecondDerivs:
    """Analytic second partials of the full vector field at a state."""
    x, y = st.x, st.y
    q = p.lam + p.A * y
    d = p.b + y + p.h * x * q
    d3 = d * d * d
    f2xx = -2.0 * y * (p.b + y) * q * q * p.h / d3
    f1xx = p.r1 * (2.0 + 2.0 * p.k0 / p.k1 - 6.0 * x / p.k1) - f2xx
    f1yy = 2.0 * x * (p.lam - p.A * p.b) * (p.b + p.h * p.lam * x) / d3
    f1xy = -(
        d * (p.lam * p.b + 2.0 * p.A * p.b * y + p.A * y * y)
        + 2.0 * p.h * x * y * q * (p.lam - p.A * p.b)
    ) / d3
    return SecondDerivs(
        f1xx=f1xx, f2xx=f2xx, f1yy=f1yy, f2yy=-f1yy, f1xy=f1xy, f2xy=-f1xy
    )


def per_capita_partials(p: Parameters, x, y):
    """Partials (u_x, u_y, v_x, v_y) of the per-capita rates (u, v).

    Array-friendly; this is an independent code path from :func:`jacobian`
    (the two are tied by J = diag(x, y) @ [[u_x, u_y], [v_x, v_y]] +
    diag(u, v) and are cross-checked in the equilibria module).
    """
    q = p.lam + p.A * y
    d = p.b + y + p.h * x * q
    d2 = d * d
    n_y = p.lam * p.b + 2.0 * p.A * p.b * y + p.A * y * y + p.h * x * q * q
    ux = p.r1 * (1.0 + p.k0 / p.k1 - 2.0 * x / p.k1) + p.h * y * q * q / d2
    uy = -n_y / d2
    vx = q * (p.b + y) / d2
    vy = x * (p.A * p.b - p.lam) / d2
    return ux, uy, vx, vy


def weighted_trace(p: Parameters, x, y):
    """x*u_x + y*v_y for the per-capita rates (u, v); array-friendly.

    Equals the Jacobian trace at equilibria, and everywhere equals
    x*y*div(F/(x*y)) -- the quantity whose fixed sign on a region rules
    out periodic orbits there.
    """
    q = p.lam + p.A * y
    d = p.b + y + p.h * x * q
    return (
        p.r1 * x * (1.0 + p.k0 / p.k1 - 2.0 * x / p.k1)
        + x * y * (q * q * p.h + (p.A * p.b - p.lam)) / (d * d)
    )


# ---------------------------------------------------------------------------
# reduced equilibrium curves and the interior-equilibrium quartic


def growth_balance_curve(p: Parameters, x):
    """Predator level at which prey growth exactly feeds predation, assuming
    the predator is itself in balance (per-predator intake == s):
    y = (r1/s)*x*(1 - x/k1)*(x - k0).  Array-friendly."""
    return prey_growth(p, x) / p.s


def predator_nullcline_pole(p: Parameters) -> float | None:
    """x where the predator-nullcline expression blows up, or None if s*h = 1."""
    denom_slope = p.A * (p.s * p.h - 1.0)
    if denom_slope == 0.0:
        return None
    return -p.s / denom_slope


def predator_nullcline(p: Parameters, x) -> float:
    """Predator level y(x) at which the predator per-capita rate vanishes:
    y = (lam*(1 - s*h)*x - s*b) / (s + A*(s*h - 1)*x).

    Raises PoleError when the denominator vanishes (x = s/(A*(1 - s*h))
    when s*h < 1).  Scalar x only.
    """
    num = p.lam * (1.0 - p.s * p.h) * x - p.s * p.b
    den = p.s + p.A * (p.s * p.h - 1.0) * x
    if abs(den) <= 1e-14 * (p.s + abs(p.A * (p.s * p.h - 1.0) * x)):
        raise PoleError(f"predator nullcline pole at x = {x!r}")
    return num / den


def prey_nullcline(p: Parameters, x) -> float | None:
    """Non-negative predator level solving the prey balance u(x, y) = 0.

    Clearing denominators in u = 0 gives the quadratic in y
        A*y**2 + (lam - f*(1 + h*A*x))*y - f*(b + h*lam*x) = 0,
    with f = r1*(1 - x/k1)*(x - k0).  Returns the non-negative root, or
    None when no real non-negative root exists.  Scalar x only.
    """
    f = p.r1 * (1.0 - x / p.k1) * (x - p.k0)
    beta = p.lam - f * (1.0 + p.h * p.A * x)
    gamma = -f * (p.b + p.h * p.lam * x)
    disc = beta * beta - 4.0 * p.A * gamma
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    # the larger root, computed without cancellation
    if beta <= 0.0:
        y = (-beta + sq) / (2.0 * p.A)
    else:
        den = beta + sq
        y = -2.0 * gamma / den if den > 0.0 else 0.0
    if y < -1e-12 * max(1.0, abs(beta) / p.A):
        return None
    return max(y, 0.0)


def equilibrium_quartic_coeffs(p: Parameters, lam: float | None = None):
    """Ascending coefficients (c0..c4) of the interior-equilibrium quartic.

    Built by multiplying (balance - nullcline) through by the nullcline
    denominator s + A*(s*h - 1)*x, so roots with positive balance value and
    away from the pole are exactly the interior-equilibrium prey levels.
    ``lam`` overrides p.lam (the quartic is affine in lam).
    """
    if lam is None:
        lam = p.lam
    u = 1.0 - p.s * p.h
    r_over_s = p.r1 / p.s
    c4 = r_over_s * p.A * u / p.k1
    c3 = -r_over_s * (p.A * u * (1.0 + p.k0 / p.k1) + p.s / p.k1)
    c2 = r_over_s * (p.s * (1.0 + p.k0 / p.k1) + p.A * u * p.k0)
    c1 = -p.r1 * p.k0 - lam * u
    c0 = p.s * p.b
    return (c0, c1, c2, c3, c4)


def equilibrium_quartic(p: Parameters, x, lam: float | None = None):
    """Evaluate the interior-equilibrium quartic by Horner; array-friendly."""
    c0, c1, c2, c3, c4 = equilibrium_quartic_coeffs(p, lam)
    return c0 + x * (c1 + x * (c2 + x * (c3 + x * c4)))


def equilibrium_quartic_deriv(p: Parameters, x, lam: float | None = None):
    """d/dx of the interior-equilibrium quartic; array-friendly."""
    c0, c1, c2, c3, c4 = equilibrium_quartic_coeffs(p, lam)
    return c1 + x * (2.0 * c2 + x * (3.0 * c3 + x * 4.0 * c4))
