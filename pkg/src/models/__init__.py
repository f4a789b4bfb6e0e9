"""Data models for the vg-stein library."""

from .params import CumulantVector, ReparamVG, SixMomentInput, VGParams
from .stein import HNorms, SteinEval, TestFunction, TestFunctionKind
from .report import (
    BlowupReport, BoundDecomposition, BoundReport, DistanceMethod, DistanceResult,
    GridSpec, JumpReport, ReportBundle,
)
from .config import CertifyConfig, CliConfig

__all__ = [
    "VGParams", "ReparamVG", "CumulantVector", "SixMomentInput",
    "TestFunction", "TestFunctionKind", "HNorms", "SteinEval",
    "BoundReport", "GridSpec", "DistanceMethod", "DistanceResult",
    "JumpReport", "BlowupReport", "BoundDecomposition", "ReportBundle",
    "CertifyConfig", "CliConfig",
]
