"""Saddle manifolds: eigendirections, section crossings, connecting-orbit bisection."""

import math

import pytest

from alleecoop.equilibria import classify_boundary
from alleecoop.exceptions import BracketError, NoCrossing, NotSaddle
from alleecoop.manifolds import (
    admissible_interval,
    grow_manifold,
    heteroclinic_find,
    manifold_gap,
    saddle_eigendirections,
)
from alleecoop.model import Parameters, State, jacobian, per_capita_rates, prey_nullcline

from conftest import FIG6


def fig6(lam=0.9776) -> Parameters:
    return Parameters(lam=lam, **FIG6)


def test_admissible_interval_closed_form():
    lo, hi = admissible_interval(fig6())
    assert lo == pytest.approx(0.66 / (5 * 0.604), rel=1e-12)
    assert hi == pytest.approx(0.66 / (0.5 * 0.604), rel=1e-12)
    assert lo < 0.9776 < hi


def test_threshold_saddle_stable_slope_matches_closed_form():
    p = fig6()
    e2 = classify_boundary(p, "E2")
    stable_dir, _ = saddle_eigendirections(p, e2)
    J = jacobian(p, e2.state)
    disc = math.sqrt(J.trace**2 - 4.0 * J.det)
    mu_neg = (J.trace - disc) / 2.0
    alpha1 = (
        (-mu_neg + p.r1 * p.k0 * (1.0 - p.k0 / p.k1))
        * (p.b + p.h * p.lam * p.k0)
        / (p.lam * p.k0)
    )
    assert stable_dir[1] / stable_dir[0] == pytest.approx(alpha1, abs=1e-8)
    # incoming branch is steeper than the balance-curve slope there
    alpha2 = p.r1 * (1.0 - p.k0 / p.k1) * (p.b + p.h * p.k0 * p.lam) / p.lam
    assert alpha1 > alpha2


def test_carrying_capacity_saddle_has_axis_eigendirection():
    p = fig6()
    e1 = classify_boundary(p, "E1")
    stable_dir, unstable_dir = saddle_eigendirections(p, e1)
    # prey axis is invariant: the stable direction lies along it
    assert abs(stable_dir[1]) < 1e-14
    assert abs(abs(stable_dir[0]) - 1.0) < 1e-14
    assert unstable_dir[1] > 0.0


def test_not_saddle_rejected():
    p = Parameters(lam=0.2, **FIG6)  # attack too weak: E1 attracting, not a saddle
    e1 = classify_boundary(p, "E1")
    with pytest.raises(NotSaddle):
        saddle_eigendirections(p, e1)


def test_branch_crossings_satisfy_balance():
    p = fig6()
    for which, sense in (("E2", "stable"), ("E1", "unstable")):
        br = grow_manifold(p, which, sense)
        ev = br.crossing
        assert ev is not None
        _, v = per_capita_rates(p, ev.state)
        assert abs(v) < 1e-9


def test_incoming_branch_stays_above_prey_nullcline():
    # inside the negative-balance wedge, the backward branch keeps above
    # the prey nullcline until the section
    p = fig6()
    br = grow_manifold(p, "E2", "stable")
    checked = 0
    for x, y in br.path.xy:
        if x <= p.k0 + 1e-3 or y <= 1e-6:
            continue
        u, v = per_capita_rates(p, State(x, y))
        if v < 0.0 and u < 0.0:  # region C-and-D of the shooting argument
            ynull = prey_nullcline(p, x)
            if ynull is not None:
                assert y > ynull
                checked += 1
    assert checked > 5


def test_gap_signs_bracket_the_connection():
    lo = manifold_gap(fig6(), 0.9773)
    hi = manifold_gap(fig6(), 0.9776)
    # the stable branch crosses above at the low end and below at the high
    # end (continuation from the ends of the admissible interval)
    assert lo.gap > 0.0
    assert hi.gap < 0.0


def test_gap_robust_to_launch_offset():
    a = manifold_gap(fig6(), 0.9776, eps_rel=1e-6)
    b = manifold_gap(fig6(), 0.9776, eps_rel=5e-7)
    assert abs(a.y1 - b.y1) < 1e-5
    assert abs(a.y2 - b.y2) < 1e-5


def test_connection_location_and_coincidence():
    bp = heteroclinic_find(fig6(), (0.9773, 0.9776))
    assert 0.9773 < bp.critical_value < 0.9776
    a, b = bp.diagnostics["final_bracket"]
    assert b - a <= 1e-6
    assert bp.diagnostics["crossing_mismatch"] < 1e-5
    lo, hi = bp.diagnostics["admissible_interval"]
    assert lo < bp.critical_value < hi


def test_gap_monotone_across_final_bracket():
    bp = heteroclinic_find(fig6(), (0.9773, 0.9776))
    a, b = bp.diagnostics["final_bracket"]
    width = b - a
    lams = [a - 2 * width, a - width, 0.5 * (a + b), b + width, b + 2 * width]
    gaps = [manifold_gap(fig6(), lam).gap for lam in lams]
    assert all(g0 > g1 for g0, g1 in zip(gaps, gaps[1:]))


def test_bracket_gates():
    with pytest.raises(BracketError):
        heteroclinic_find(fig6(), (0.05, 0.1))  # outside the admissible interval
    with pytest.raises(BracketError):
        heteroclinic_find(fig6(), (0.9776, 0.98))  # same gap sign at both ends


def test_no_crossing_carries_partial_branch():
    p = fig6()
    with pytest.raises(NoCrossing) as err:
        grow_manifold(p, "E2", "stable", arc_cap_factor=0.01)
    assert err.value.reason == "arc_length"
    assert err.value.branch is not None
    assert len(err.value.branch.path) > 1
