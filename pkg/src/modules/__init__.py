"""Numerical modules: Bessel functions, the VG law, the Stein solver and its bounds."""

from . import bessel, certify, distances, moment_bounds, stein_factors, stein_solver, vg_dist

__all__ = [
    "bessel",
    "vg_dist",
    "stein_solver",
    "stein_factors",
    "moment_bounds",
    "distances",
    "certify",
]
