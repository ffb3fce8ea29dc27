"""Shared parameter sets for the bundled scenarios."""

import pytest

from alleecoop.model import Parameters

# scenario parameter sets (see figures/*.cfg)
FIG1_LEFT = dict(r1=0.45, k1=3.0, k0=-1.0, lam=0.2, A=0.8, b=0.5, h=0.7)
FIG1_RIGHT = dict(r1=1.2, k1=5.0, k0=1.0, lam=1.2, A=0.2, b=0.5, h=0.9)
FIG2 = dict(r1=1.5, k1=3.0, k0=1.0, A=0.8, b=0.5, h=0.7, s=0.75)
FIG3 = dict(r1=1.5, k1=3.0, k0=1.0, A=0.8, b=0.5, h=0.7, s=0.8)
FIG4 = dict(r1=1.5, k1=3.0, k0=1.0, lam=0.3, A=0.8, b=0.5, h=0.7)
FIG5 = dict(r1=0.3, k1=4.0, k0=1.0, lam=0.1, A=0.1, b=3.5, h=0.9)
FIG6 = dict(r1=0.6, k1=5.0, k0=0.5, A=0.1, b=1.5, h=0.9, s=0.44)
FIG8 = dict(r1=1.5, k1=3.0, lam=0.3, A=0.8, b=0.5, h=0.7, s=0.5)

# fixtures discovered by scripts/find_extinction_params.py
EXTINCTION = dict(r1=1e-6, k1=1.0, k0=0.6, lam=0.25, A=0.8, b=0.5, h=0.5, s=0.3)
EXTINCTION_GENERIC = dict(r1=1.0, k1=1.0, k0=0.6, lam=0.25, A=0.8, b=0.5, h=0.5, s=0.3)
COROLLARY = dict(r1=1.0, k1=1.0, k0=-1.0, lam=0.5, A=0.1, b=1.0, h=0.5, s=0.2)


@pytest.fixture
def fig4_params() -> Parameters:
    return Parameters(s=0.75, **FIG4)


@pytest.fixture
def fig2_params() -> Parameters:
    return Parameters(lam=0.2, **FIG2)
