"""Numerical analysis toolkit for a planar predator-prey model with a prey
Allee threshold and saturating hunting cooperation: equilibria and their
stability, no-cycle/extinction certificates, codimension-1 bifurcation
locators, saddle-manifold shooting, and a deterministic CSV/JSON CLI."""

__version__ = "0.1.0"

from .model import Parameters, State  # noqa: F401
