"""Variational eigenvalue problems for nonhomogeneous quasilinear operators in Orlicz-Sobolev spaces.

The problem is ``-div(a(|grad u|) grad u) = lam |u|^(q(x)-2) u`` with ``u = 0`` on
the boundary of a box. The package is organised as:

``orlicz_core``
    Young functions, Luxemburg norms, growth indices, hypothesis audits.
``discretization``
    Structured 1D/2D grids, discrete gradients, bump functions.
``solver``
    The energy functional, its gradient, ball minimisation and genus sequences.
``config`` / ``cli``
    JSON problem descriptions and the ``orlicz-spectra`` command.
"""
from .discretization import Grid, ScalarField, build_bump, build_disjoint_bumps
from .orlicz_core import (
    ExponentField,
    PowerLog,
    PowerOverLog,
    PurePower,
    Tabulated,
    YoungFunction,
    estimate_indices,
    sobolev_norm,
)
from .solver import (
    EigenPair,
    EnergyContext,
    TrivialOutcome,
    ball_minimize,
    energy,
    energy_gradient,
    genus_sequence_solve,
)

__version__ = "0.1.0"

__all__ = [
    "Grid", "ScalarField", "build_bump", "build_disjoint_bumps",
    "ExponentField", "PowerLog", "PowerOverLog", "PurePower", "Tabulated", "YoungFunction",
    "estimate_indices", "sobolev_norm",
    "EigenPair", "EnergyContext", "TrivialOutcome", "ball_minimize", "energy",
    "energy_gradient", "genus_sequence_solve",
]
