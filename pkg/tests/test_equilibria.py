"""Equilibrium enumeration and classification against residual/dual-formula oracles."""

import math

import numpy as np
import pytest

from alleecoop.equilibria import (
    NON_HYPERBOLIC,
    SADDLE,
    STABLE_FOCUS,
    STABLE_NODE,
    UNSTABLE_NODE,
    boundary_equilibria,
    classify_boundary,
    classify_interior,
    interior_equilibria,
    interior_prey_levels,
)
from alleecoop.exceptions import DomainError
from alleecoop.integrator import IntegratorConfig, OmegaEquilibrium, classify_omega_limit, integrate
from alleecoop.model import (
    Parameters,
    State,
    growth_balance_curve,
    jacobian,
    per_capita_rates,
    predator_nullcline,
    vector_field,
    with_param,
)

from conftest import FIG1_LEFT, FIG1_RIGHT, FIG2, FIG3, FIG4


# ---------------------------------------------------------------------------
# boundary equilibria


def test_boundary_count_by_regime():
    strong = Parameters(lam=0.2, **FIG2)
    assert [e.kind for e in boundary_equilibria(strong)] == ["E0", "E1", "E2"]
    weak = with_param(strong, "k0", -1.0)
    assert [e.kind for e in boundary_equilibria(weak)] == ["E0", "E1"]
    degen = with_param(strong, "k0", 0.0)
    eqs = boundary_equilibria(degen)
    assert [e.kind for e in eqs] == ["E0", "E1"]
    assert eqs[0].degenerate and eqs[0].cls == NON_HYPERBOLIC


def test_origin_stable_under_strong_threshold():
    p = Parameters(lam=0.2, **FIG2)
    e0 = classify_boundary(p, "E0")
    assert e0.cls == STABLE_NODE
    assert sorted(ev.real for ev in e0.eigenvalues) == [-p.r1 * p.k0, -p.s]
    weak = with_param(p, "k0", -0.5)
    assert classify_boundary(weak, "E0").cls == SADDLE


def test_carrying_capacity_state_flips_at_threshold():
    # predator-direction eigenvalue 0.6/0.92 - 0.75 < 0: attracting
    p_lo = Parameters(lam=0.2, **FIG2)
    e = classify_boundary(p_lo, "E1")
    assert e.cls == STABLE_NODE
    gate = 0.6 / 0.92 - 0.75
    assert any(ev.real == pytest.approx(gate, rel=1e-12) for ev in e.eigenvalues)
    # 0.9/1.13 - 0.75 > 0: saddle
    p_hi = Parameters(lam=0.3, **FIG2)
    e = classify_boundary(p_hi, "E1")
    assert e.cls == SADDLE
    gate = 0.9 / 1.13 - 0.75
    assert any(ev.real == pytest.approx(gate, rel=1e-12) for ev in e.eigenvalues)


def test_threshold_state_requires_strong_regime():
    weak = Parameters(k0=-1.0, r1=1.5, k1=3.0, lam=0.2, A=0.8, b=0.5, h=0.7, s=0.75)
    with pytest.raises(DomainError):
        classify_boundary(weak, "E2")


def test_threshold_state_classes():
    p = Parameters(lam=0.2, **FIG2)  # gate 0.2/(0.5+0.14) - 0.75 < 0
    assert classify_boundary(p, "E2").cls == SADDLE
    hot = with_param(p, "lam", 2.0)  # gate 2/(0.5+1.4) - 0.75 > 0
    assert classify_boundary(hot, "E2").cls == UNSTABLE_NODE


def test_boundary_near_threshold_is_refused():
    # gate within 1e-10 of zero: classification refused
    p = Parameters(lam=0.2, **FIG2)
    lam_c = p.s * p.b / (p.k1 * (1.0 - p.s * p.h))
    assert classify_boundary(with_param(p, "lam", lam_c), "E1").cls == NON_HYPERBOLIC


# ---------------------------------------------------------------------------
# interior equilibria


def test_scenario1_weak_panel_counts():
    counts = {}
    for s in (0.3, 0.73, 0.78):
        p = Parameters(s=s, **FIG1_LEFT)
        counts[s] = len(interior_equilibria(p))
    assert sorted(counts.values()) == [0, 1, 2]
    assert counts == {0.3: 1, 0.73: 2, 0.78: 0}


def test_scenario1_strong_panel_counts():
    counts = {}
    for s in (0.38, 0.6, 0.8):
        p = Parameters(s=s, **FIG1_RIGHT)
        counts[s] = len(interior_equilibria(p))
    assert sorted(counts.values()) == [0, 1, 2]
    assert counts == {0.38: 0, 0.6: 2, 0.8: 1}


def test_scenario3_fold_counts():
    # two interior equilibria on one side of the fold, none on the other
    assert len(interior_equilibria(Parameters(lam=0.23, **FIG3))) == 2
    assert len(interior_equilibria(Parameters(lam=0.2, **FIG3))) == 0


def test_interior_residuals_and_ordering():
    p = Parameters(lam=0.2, **FIG2)
    eqs = interior_equilibria(p)
    assert len(eqs) == 2
    xs = [e.state.x for e in eqs]
    assert xs == sorted(xs)
    for e in eqs:
        fx, fy = vector_field(p, e.state)
        assert math.hypot(fx, fy) < 1e-9
        assert abs(growth_balance_curve(p, e.state.x) - predator_nullcline(p, e.state.x)) < 1e-9
        u, v = per_capita_rates(p, e.state)
        assert abs(u) < 1e-9 and abs(v) < 1e-9
        assert max(0.0, p.k0) < e.state.x < p.k1


def test_interior_classification_examples():
    p = Parameters(lam=0.2, **FIG2)
    lo, hi = interior_equilibria(p)
    assert lo.cls == STABLE_FOCUS
    assert hi.cls == SADDLE
    assert jacobian(p, hi.state).det < 0.0


def test_fig4_unique_interior_is_stable_on_the_quiet_side():
    p = Parameters(s=0.78, **FIG4)
    eqs = interior_equilibria(p)
    assert len(eqs) == 1
    assert eqs[0].cls == STABLE_FOCUS


def test_double_root_reported_with_multiplicity():
    # at the fold value the merged root comes back non-hyperbolic, multiplicity 2
    from alleecoop.bifurcation import saddle_node_lambda

    p = Parameters(lam=0.2, **FIG3)
    fold = saddle_node_lambda(p, (0.2, 0.23))
    pc = with_param(p, "lam", fold.critical_value)
    eqs = interior_equilibria(pc)
    assert any(e.multiplicity == 2 and e.cls == NON_HYPERBOLIC for e in eqs)


def test_dual_formula_determinant_and_trace():
    # reduced-curve route equals the Jacobian route at 50 solved equilibria
    rng = np.random.default_rng(23)
    checked = 0
    while checked < 50:
        p = Parameters(
            r1=rng.uniform(0.2, 2.0),
            k1=rng.uniform(1.0, 5.0),
            k0=rng.uniform(-1.5, 0.9),
            lam=rng.uniform(0.05, 1.0),
            A=rng.uniform(0.05, 1.0),
            b=rng.uniform(0.2, 2.0),
            h=rng.uniform(0.05, 1.5),
            s=rng.uniform(0.05, 1.0),
        )
        if p.k1 <= max(p.k0, 0.0):
            continue
        for eq in interior_equilibria(p):  # raises on cross-check failure
            classify_interior(p, eq)
            checked += 1


def test_thm_count_bound_spot_check():
    # under the at-most-two hypotheses the count never exceeds 2 (small sweep
    # here; the full thousand-sample sweep runs in the acceptance suite)
    rng = np.random.default_rng(31)
    kept = 0
    while kept < 150:
        p = _hypothesis_region_sample(rng)
        if p is None:
            continue
        kept += 1
        assert len(interior_prey_levels(p)) <= 2


def _hypothesis_region_sample(rng) -> Parameters | None:
    r1 = rng.uniform(0.05, 2.5)
    k1 = rng.uniform(0.5, 5.0)
    k0 = rng.uniform(-k1, 0.95 * k1)
    lam = rng.uniform(0.02, 1.5)
    A = rng.uniform(0.02, 1.5)
    b = rng.uniform(0.1, 3.0)
    h = rng.uniform(0.02, 1.5)
    s = rng.uniform(0.02, 1.5)
    if k1 <= max(k0, 0.0) + 1e-3 or s * h >= 1.0:
        return None
    cond1 = k0 > k1 / 2.0
    cond2 = k0 < 0.0 and lam < A * b
    cond3 = (
        k0 < 0.0
        and lam > A * b
        and (r1 / s) * (1.0 + k0 / k1) < A * (lam - A * b) * (1.0 - s * h) ** 2 / s**2
    )
    if not (cond1 or cond2 or cond3):
        return None
    return Parameters(r1=r1, k1=k1, k0=k0, lam=lam, A=A, b=b, h=h, s=s)


def test_classification_agrees_with_simulation():
    # stable focus: a ring of starts at radius 1e-3 collapses onto it
    p = Parameters(s=0.78, **FIG4)
    eq = interior_equilibria(p)[0]
    assert eq.cls == STABLE_FOCUS
    for ang in np.linspace(0.0, 2.0 * math.pi, 6, endpoint=False):
        init = State(eq.state.x + 1e-3 * math.cos(ang), eq.state.y + 1e-3 * math.sin(ang))
        res = classify_omega_limit(p, init, horizon=600.0)
        assert isinstance(res, OmegaEquilibrium)
        assert math.hypot(res.state.x - eq.state.x, res.state.y - eq.state.y) < 1e-5

    # saddle: at least one ring start leaves the neighbourhood
    p2 = Parameters(lam=0.2, **FIG2)
    sad = interior_equilibria(p2)[1]
    assert sad.cls == SADDLE
    departed = 0
    for ang in np.linspace(0.0, 2.0 * math.pi, 6, endpoint=False):
        init = State(sad.state.x + 1e-3 * math.cos(ang), sad.state.y + 1e-3 * math.sin(ang))
        traj = integrate(p2, init, IntegratorConfig(t_end=200.0))
        fin = traj.final_state()
        if math.hypot(fin.x - sad.state.x, fin.y - sad.state.y) > 0.1:
            departed += 1
    assert departed >= 1
