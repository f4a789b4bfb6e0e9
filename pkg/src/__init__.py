"""
vg-stein - Variance-gamma Stein-method numerics

A numerical library and CLI for the variance-gamma distribution, the
solution of its Stein equation, the Stein-factor constants and bounds built
on it, probability-metric conversions and the six-moment bound, together
with a harness that numerically certifies every implemented inequality.
"""

__version__ = "1.0.0"
__author__ = "vg-stein developers"
