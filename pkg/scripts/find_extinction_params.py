#!/usr/bin/env python3
"""Sweep for parameter sets that pass the predator-extinction checklist.

The sign-case gates pin the geometry: with s*h < 1 and k0 > k1/2, the
case-(i) pattern (lam < A*b with the predator nullcline positive at k0
and negative at k1) needs the nullcline pole left of k0, which forces
lam between the two prey-only exchange values s*b/(k*(1-s*h)).  The
grid-positivity item is the binding one: the prey term r1*x*(1 +
k0/k1 - 2*x/k1) is negative for x beyond the midpoint, so every sample
of the inset grid stays positive only when r1 is small enough that the
predator term (floored by the grid inset) dominates.  This script scans
that geometry, reports which candidates pass which checklist items, and
prints the fully green ones.

The checked-in fixture (tests/data/extinction.cfg) came from this sweep.
"""

from __future__ import annotations

import os
import sys
from itertools import product

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from alleecoop.certificates import check_extinction
from alleecoop.model import Parameters


def candidates():
    k1 = 1.0
    for k0, s, h, b, A, lam_frac, r1 in product(
        (0.55, 0.6, 0.7),
        (0.25, 0.3),
        (0.5,),
        (0.5,),
        (0.7, 0.8),
        (0.4, 0.5, 0.6),  # position of lam inside the exchange interval
        (1.0, 1e-2, 1e-4, 1e-6),
    ):
        sh = s * h
        lam_lo = s * b / (k1 * (1.0 - sh))
        lam_hi = s * b / (k0 * (1.0 - sh))
        lam = lam_lo + lam_frac * (lam_hi - lam_lo)
        if lam >= A * b:  # case (i) needs lam < A*b
            continue
        yield Parameters(r1=r1, k1=k1, k0=k0, lam=lam, A=A, b=b, h=h, s=s)


def main() -> int:
    hits = []
    for p in candidates():
        rep = check_extinction(p, n_inits=20, grid_n=200)
        case = rep.checklist.get("case_i_signs")
        if case is None or not case.ok:
            continue
        grid_ok = rep.checklist["trace_all_positive"].ok
        sim_ok = rep.verdict == "pass"
        tag = "FULL" if (grid_ok and sim_ok) else ("sim-only" if sim_ok else "case-only")
        print(
            f"{tag:9s} r1={p.r1:<8g} k0={p.k0} s={p.s} A={p.A} lam={p.lam:.6f} "
            f"grid_min={rep.minimum:.3e}"
        )
        if grid_ok and sim_ok:
            hits.append(p)
    print(f"\n{len(hits)} fully green candidate(s)")
    for p in hits:
        print(
            f"  r1={p.r1!r} k1={p.k1!r} k0={p.k0!r} lambda={p.lam!r} "
            f"A={p.A!r} b={p.b!r} h={p.h!r} s={p.s!r}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
