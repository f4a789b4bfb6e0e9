"""Utility modules: quadrature, logging helpers, report files and validation."""
