"""Adaptive explicit Runge-Kutta integration of the model, forward or
backward in time, with event localization and omega-limit classification.

The stepper is a Dormand-Prince 5(4) embedded pair specialized to the
plane (plain-float arithmetic, FSAL).  Events are scalar functions of the
state whose sign changes are localized by bisection on the step's dense
output (cubic Hermite) to 1e-9 in time, then sharpened on error-controlled
sub-steps so the reported event state satisfies its condition to well
below 1e-9.  Ties between simultaneous events go to the earlier entry in
the event list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import StepFailure
from .model import Parameters, State, vector_field_xy

__all__ = [
    "IntegratorConfig",
    "EventSpec",
    "Event",
    "Trajectory",
    "Section",
    "PeriodicOrbit",
    "OmegaEquilibrium",
    "OmegaCycle",
    "OmegaUndecided",
    "integrate",
    "classify_omega_limit",
    "detect_limit_cycle",
]

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9
_EVENT_TIME_TOL = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and horizon for one integration run.

    ``t_end`` is the (positive) time span; with direction 'backward' the
    recorded times run from 0 down to -t_end.
    """

    t_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    direction: str = "forward"

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0 and 0.0 < self.abs_tol < 1.0):
            raise ValueError("tolerances must lie in (0, 1)")
        if not self.max_step > 0.0:
            raise ValueError("max_step must be positive")
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise ValueError("t_end must be finite and positive")
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"direction must be forward|backward, got {self.direction!r}")


@dataclass(frozen=True)
class EventSpec:
    """A scalar section function g(x, y) whose zero crossing is an event.

    direction: +1 only rising crossings, -1 only falling, 0 either.
    """

    fn: Callable[[float, float], float]
    kind: str = "section"
    direction: int = 0
    terminal: bool = True
    label: str = ""


@dataclass(frozen=True)
class Event:
    kind: str
    label: str
    t: float
    state: State


@dataclass
class Trajectory:
    """Accepted-step samples of one integration run.

    Times are strictly increasing (forward) or strictly decreasing
    (backward).  ``stop_reason`` is 't_end', 'event' or 'arc_length'.
    """

    t: np.ndarray
    xy: np.ndarray
    events: list[Event] = field(default_factory=list)
    terminal_event: Event | None = None
    stop_reason: str = "t_end"

    def __len__(self) -> int:
        return len(self.t)

    def final_state(self) -> State:
        return State(float(self.xy[-1, 0]), float(self.xy[-1, 1]))

    def arc_length(self) -> float:
        d = np.diff(self.xy, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())


def _initial_step(f, x, y, fx, fy, rel_tol, abs_tol, max_step, span):
    """Hairer-style starting step selection (two trial derivatives)."""
    sx = abs_tol + rel_tol * abs(x)
    sy = abs_tol + rel_tol * abs(y)
    d0 = math.sqrt(0.5 * ((x / sx) ** 2 + (y / sy) ** 2))
    d1 = math.sqrt(0.5 * ((fx / sx) ** 2 + (fy / sy) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    gx, gy = f(x + h0 * fx, y + h0 * fy)
    d2 = math.sqrt(0.5 * (((gx - fx) / sx) ** 2 + ((gy - fy) / sy) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step, span)


def _rk_step(f, x, y, fx, fy, h):
    """One DOPRI 5(4) step; returns (x5, y5, f5x, f5y, err_x, err_y)."""
    k1x, k1y = fx, fy
    k2x, k2y = f(x + h * (_A21 * k1x), y + h * (_A21 * k1y))
    k3x, k3y = f(x + h * (_A31 * k1x + _A32 * k2x), y + h * (_A31 * k1y + _A32 * k2y))
    k4x, k4y = f(
        x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
        y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
    )
    k5x, k5y = f(
        x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
        y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
    )
    k6x, k6y = f(
        x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
        y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
    )
    x5 = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
    y5 = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
    k7x, k7y = f(x5, y5)
    err_x = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
    err_y = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
    return x5, y5, k7x, k7y, err_x, err_y


def _crossed(g0: float, g1: float, direction: int) -> bool:
    if direction >= 0 and g0 < 0.0 <= g1:
        return True
    if direction <= 0 and g0 > 0.0 >= g1:
        return True
    return False


def _locate_event(f, spec, tau0, x0, y0, f0x, f0y, h, g0):
    """Event time/state within an accepted step [tau0, tau0 + h].

    Bisection on the step's dense output, realized as single error-
    controlled sub-steps from the step start (exact to the step's own
    order), from the 1e-9 time tolerance down to rounding so that the
    reported event state satisfies its condition to well below 1e-9.
    """

    def state_at(dt):
        if dt <= 0.0:
            return x0, y0
        xs, ys, _, _, _, _ = _rk_step(f, x0, y0, f0x, f0y, dt)
        return xs, ys

    lo_t, hi_t = 0.0, h
    gl = g0
    for _ in range(80):
        if hi_t - lo_t <= max(1e-13, 2.2e-16 * abs(tau0 + hi_t)):
            break
        mid_t = 0.5 * (lo_t + hi_t)
        gm = spec.fn(*state_at(mid_t))
        if _crossed(gl, gm, spec.direction):
            hi_t = mid_t
        else:
            lo_t, gl = mid_t, gm
    xe, ye = state_at(hi_t)
    return tau0 + hi_t, xe, ye


def integrate(
    p: Parameters,
    init: State,
    cfg: IntegratorConfig,
    events: Sequence[EventSpec] = (),
    max_arc_length: float | None = None,
) -> Trajectory:
    """Integrate the model from ``init`` over ``cfg.t_end`` time units.

    Raises StepFailure when the adaptive step underflows.  A terminal
    event truncates the run; non-terminal events are recorded and the run
    continues.  ``max_arc_length`` (phase-plane length) is an optional
    extra stopping criterion.
    """
    sign = 1.0 if cfg.direction == "forward" else -1.0

    def f(x, y):
        fx, fy = vector_field_xy(p, x, y)
        return sign * fx, sign * fy

    span = cfg.t_end
    x, y = init.x, init.y
    fx, fy = f(x, y)
    tau = 0.0
    ts = [0.0]
    xs = [(x, y)]
    recorded: list[Event] = []
    terminal: Event | None = None
    stop_reason = "t_end"
    arc = 0.0

    g_prev = [spec.fn(x, y) for spec in events]
    h = _initial_step(f, x, y, fx, fy, cfg.rel_tol, cfg.abs_tol, cfg.max_step, span)

    while tau < span * (1.0 - 1e-14):
        h = min(h, cfg.max_step, span - tau)
        if h < max(1e-14, 4.0 * 2.2e-16 * abs(tau)):
            raise StepFailure(
                f"step size underflow at t={sign * tau!r} (h={h!r}, state=({x!r}, {y!r}))"
            )
        x1, y1, f1x, f1y, err_x, err_y = _rk_step(f, x, y, fx, fy, h)
        sx = cfg.abs_tol + cfg.rel_tol * max(abs(x), abs(x1))
        sy = cfg.abs_tol + cfg.rel_tol * max(abs(y), abs(y1))
        err = math.sqrt(0.5 * ((err_x / sx) ** 2 + (err_y / sy) ** 2))
        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            continue
        if not (math.isfinite(x1) and math.isfinite(y1)):
            raise StepFailure(f"non-finite state at t={sign * (tau + h)!r}")

        # event scan over the accepted step
        best = None  # (event_time, spec_index, xe, ye)
        for i, spec in enumerate(events):
            g1 = spec.fn(x1, y1)
            if _crossed(g_prev[i], g1, spec.direction):
                te, xe, ye = _locate_event(f, spec, tau, x, y, fx, fy, h, g_prev[i])
                if best is None or te < best[0] - _EVENT_TIME_TOL:
                    best = (te, i, xe, ye)
            g_prev[i] = g1

        if best is not None:
            te, i, xe, ye = best
            spec = events[i]
            ev = Event(kind=spec.kind, label=spec.label, t=sign * te, state=State(max(xe, 0.0), max(ye, 0.0)))
            if spec.terminal:
                ts.append(sign * te)
                xs.append((xe, ye))
                terminal = ev
                stop_reason = "event"
                break
            recorded.append(ev)
            g_prev = [sp.fn(x1, y1) for sp in events]

        arc += math.hypot(x1 - x, y1 - y)
        tau += h
        x, y, fx, fy = x1, y1, f1x, f1y
        ts.append(sign * tau)
        xs.append((x, y))
        if max_arc_length is not None and arc > max_arc_length:
            stop_reason = "arc_length"
            break
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * (err ** -0.2 if err > 0.0 else 2.0)))

    return Trajectory(
        t=np.asarray(ts, dtype=float),
        xy=np.asarray(xs, dtype=float),
        events=recorded,
        terminal_event=terminal,
        stop_reason=stop_reason,
    )


# ---------------------------------------------------------------------------
# sections, return maps and omega limits


@dataclass(frozen=True)
class Section:
    """An oriented line section: crossing zero of (state - point) . normal."""

    point: tuple[float, float]
    normal: tuple[float, float] = (0.0, 1.0)

    def value(self, x: float, y: float) -> float:
        return (x - self.point[0]) * self.normal[0] + (y - self.point[1]) * self.normal[1]

    @property
    def tangent(self) -> tuple[float, float]:
        nx, ny = self.normal
        norm = math.hypot(nx, ny)
        return ny / norm, -nx / norm

    def coord(self, x: float, y: float) -> float:
        tx, ty = self.tangent
        return (x - self.point[0]) * tx + (y - self.point[1]) * ty

    def state_at(self, z: float) -> tuple[float, float]:
        tx, ty = self.tangent
        return self.point[0] + z * tx, self.point[1] + z * ty


@dataclass(frozen=True)
class PeriodicOrbit:
    """A located fixed point of the first-return map."""

    period: float
    section_state: State
    amplitude: tuple[float, float]  # (x extent, y extent) over one loop
    bounds: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    residual: float
    return_slope: float

    @property
    def stable(self) -> bool:
        return abs(self.return_slope) < 1.0


@dataclass(frozen=True)
class OmegaEquilibrium:
    state: State


@dataclass(frozen=True)
class OmegaCycle:
    orbit: PeriodicOrbit

    @property
    def period(self) -> float:
        return self.orbit.period

    @property
    def amplitude(self) -> tuple[float, float]:
        return self.orbit.amplitude


@dataclass(frozen=True)
class OmegaUndecided:
    reason: str


OmegaLimit = OmegaEquilibrium | OmegaCycle | OmegaUndecided


def _return_once(p, section, z, t_max, rel_tol, abs_tol):
    """One application of the first-return map from section coordinate z.

    Returns (z_next, return_time, trajectory) or None when no same-direction
    crossing occurs within t_max.
    """
    x0, y0 = section.state_at(z)
    if x0 <= 0.0 or y0 <= 0.0:
        return None
    spec = EventSpec(fn=section.value, kind="section", direction=+1, terminal=True, label="return")
    cfg = IntegratorConfig(t_end=t_max, rel_tol=rel_tol, abs_tol=abs_tol)
    traj = integrate(p, State(x0, y0), cfg, events=[spec])
    if traj.terminal_event is None:
        return None
    ev = traj.terminal_event
    return section.coord(ev.state.x, ev.state.y), ev.t, traj


def detect_limit_cycle(
    p: Parameters,
    seed: State,
    section: Section | None = None,
    *,
    transient: float = 300.0,
    scan_time: float = 1500.0,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    residual_tol: float = 1e-7,
    min_amplitude: float | None = None,
    max_iter: int = 30,
) -> PeriodicOrbit | None:
    """Locate a periodic orbit near the forward orbit of ``seed``.

    Integrates past a transient, anchors a section through the trailing
    orbit's mean point (transverse to the rotation), then finds a fixed
    point of the first-return map by secant iteration on the section
    coordinate.  Returns None when no return occurs, the iteration fails,
    or the located loop is too small to be a genuine cycle (a focus).
    """
    if min_amplitude is None:
        min_amplitude = 1e-3 * p.k1
    cfg = IntegratorConfig(t_end=transient, rel_tol=rel_tol, abs_tol=abs_tol)
    warm = integrate(p, seed, cfg)
    start = warm.final_state()
    fx, fy = vector_field_xy(p, start.x, start.y)
    if math.hypot(fx, fy) < 1e-10:
        return None  # parked at an equilibrium

    if section is None:
        scan = integrate(
            p, start, IntegratorConfig(t_end=scan_time, rel_tol=rel_tol, abs_tol=abs_tol)
        )
        t, xy = scan.t, scan.xy
        half = t >= t[0] + 0.5 * (t[-1] - t[0])
        tt, pts = t[half], xy[half]
        if len(tt) < 3:
            return None
        dt = np.diff(tt)
        wmean = ((pts[:-1] + pts[1:]) * 0.5 * dt[:, None]).sum(axis=0) / dt.sum()
        section = Section(point=(float(wmean[0]), float(wmean[1])), normal=(0.0, 1.0))
        start = scan.final_state()

    # collect a few raw crossings to seed the secant iteration
    spec = EventSpec(fn=section.value, kind="section", direction=+1, terminal=False, label="scan")
    scan2 = integrate(
        p, start, IntegratorConfig(t_end=scan_time, rel_tol=rel_tol, abs_tol=abs_tol), events=[spec]
    )
    zs = [section.coord(ev.state.x, ev.state.y) for ev in scan2.events]
    if len(zs) < 2:
        return None
    t_ret = scan_time if len(zs) < 3 else 5.0 * (scan2.events[-1].t - scan2.events[-2].t)
    t_ret = max(t_ret, 1.0)

    z1 = zs[-1]
    r1 = _return_once(p, section, z1, 20.0 * t_ret, rel_tol, abs_tol)
    if r1 is None:
        return None
    F1 = r1[0] - z1
    z0, F0 = zs[-2], None
    best = (z1, r1, abs(F1))
    for _ in range(max_iter):
        if abs(F1) < residual_tol:
            break
        if F0 is None:
            r0 = _return_once(p, section, z0, 20.0 * t_ret, rel_tol, abs_tol)
            if r0 is None:
                break
            F0 = r0[0] - z0
        if F1 == F0:
            break
        z2 = z1 - F1 * (z1 - z0) / (F1 - F0)
        if not math.isfinite(z2):
            break
        r2 = _return_once(p, section, z2, 20.0 * t_ret, rel_tol, abs_tol)
        if r2 is None:
            break
        z0, F0 = z1, F1
        z1, r1 = z2, r2
        F1 = r1[0] - z1
        if abs(F1) < best[2]:
            best = (z1, r1, abs(F1))
    z_star, ret, residual = best
    if residual >= residual_tol:
        return None

    loop = ret[2]
    xmin, xmax = float(loop.xy[:, 0].min()), float(loop.xy[:, 0].max())
    ymin, ymax = float(loop.xy[:, 1].min()), float(loop.xy[:, 1].max())
    amp = (xmax - xmin, ymax - ymin)
    if max(amp) < min_amplitude:
        return None  # shrinking spiral around a focus, not a cycle
    delta = 1e-3 * max(amp[0], 1e-6)
    probe = _return_once(p, section, z_star + delta, 20.0 * t_ret, rel_tol, abs_tol)
    slope = (probe[0] - ret[0]) / delta if probe is not None else math.nan
    sx, sy = section.state_at(z_star)
    return PeriodicOrbit(
        period=ret[1],
        section_state=State(sx, sy),
        amplitude=amp,
        bounds=(xmin, xmax, ymin, ymax),
        residual=residual,
        return_slope=slope,
    )


def classify_omega_limit(
    p: Parameters,
    init: State,
    horizon: float,
    *,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
) -> OmegaLimit:
    """Classify the forward limit set of ``init`` over the given horizon.

    Equilibrium when the state settles (vector field norm < 1e-8 and the
    trailing 5%-of-horizon window moves less than 1e-7); Cycle when a
    first-return fixed point is found; Undecided otherwise.
    """
    cfg = IntegratorConfig(t_end=horizon, rel_tol=rel_tol, abs_tol=abs_tol)
    traj = integrate(p, init, cfg)
    final = traj.final_state()
    fx, fy = vector_field_xy(p, final.x, final.y)
    window = traj.t >= traj.t[-1] - 0.05 * horizon
    disp = float(
        np.hypot(traj.xy[window, 0] - final.x, traj.xy[window, 1] - final.y).max()
    )
    if math.hypot(fx, fy) < 1e-8 and disp < 1e-7:
        return OmegaEquilibrium(final)
    orbit = detect_limit_cycle(
        p,
        final,
        transient=0.1 * horizon,
        scan_time=0.5 * horizon,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
    )
    if orbit is not None:
        return OmegaCycle(orbit)
    return OmegaUndecided("neither settled nor periodic within the horizon")
