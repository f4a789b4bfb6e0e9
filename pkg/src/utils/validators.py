"""Validation utilities for emitted report bundles."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from ..models.report import REFINEMENT_TOL

logger = logging.getLogger(__name__)

RECORD_TYPES = ("bound", "jump", "blowup", "stated_constant")
BOUND_FIELDS = ("suite", "bound_id", "params", "lhs_sup", "rhs", "margin", "pass")


@dataclass
class ValidationResult:
    """Result from a validation check."""
    check_name: str
    passed: bool
    severity: str  # 'error', 'warning', 'info'
    message: str
    details: Optional[Dict[str, Any]] = None


def _number(value: Any) -> Optional[float]:
    """Floats as written by ReportWriter, where non-finite values are strings."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if value in ("nan", "inf", "-inf"):
        return float(value)
    return None


class ReportValidator:
    """Schema checks for report bundles: version, config echo, typed records."""

    def validate_bundle(self, data: Dict[str, Any]) -> List[ValidationResult]:
        """Validate a bundle as loaded from JSON.

        Args:
            data: Parsed bundle document

        Returns:
            List of validation results
        """
        results: List[ValidationResult] = []

        version = data.get("version")
        results.append(ValidationResult(
            check_name="version",
            passed=isinstance(version, str) and bool(version),
            severity="error",
            message=f"version: {version!r}",
        ))
        results.append(ValidationResult(
            check_name="config_echo",
            passed=isinstance(data.get("config"), dict),
            severity="error",
            message="config echo must be a mapping",
        ))

        records = data.get("records")
        if not isinstance(records, list):
            results.append(ValidationResult(
                check_name="records", passed=False, severity="error",
                message="records must be a list",
            ))
            return results

        for i, rec in enumerate(records):
            results.extend(self._validate_record(i, rec))

        failing = sum(1 for rec in records if isinstance(rec, dict) and rec.get("pass") is False)
        expected = data.get("summary", {}).get("failures")
        if expected is not None:
            results.append(ValidationResult(
                check_name="failure_count",
                passed=expected == failing,
                severity="error",
                message=f"summary reports {expected} failures, records contain {failing}",
            ))

        errors = sum(1 for r in results if not r.passed and r.severity == "error")
        logger.info(f"Bundle validation completed: {len(results)} checks, {errors} errors")
        return results

    def _validate_record(self, index: int, rec: Any) -> List[ValidationResult]:
        if not isinstance(rec, dict):
            return [ValidationResult(f"record[{index}]", False, "error", "record is not a mapping")]
        record_type = rec.get("record_type")
        if record_type not in RECORD_TYPES:
            return [ValidationResult(f"record[{index}].record_type", False, "error",
                                     f"unknown record type {record_type!r}")]
        if record_type != "bound":
            return []

        missing = [name for name in BOUND_FIELDS if name not in rec]
        if missing:
            return [ValidationResult(f"record[{index}].fields", False, "error",
                                     f"missing fields: {', '.join(missing)}")]

        lhs, rhs, margin = (_number(rec[k]) for k in ("lhs_sup", "rhs", "margin"))
        if lhs is None or rhs is None or margin is None:
            return [ValidationResult(f"record[{index}].numbers", False, "error",
                                     "lhs_sup, rhs and margin must be numbers")]
        results: List[ValidationResult] = []
        if math.isfinite(lhs) and math.isfinite(rhs):
            consistent = abs((rhs - lhs) - margin) <= 1e-12 * max(1.0, abs(rhs), abs(lhs))
            results.append(ValidationResult(
                check_name=f"record[{index}].margin", passed=consistent, severity="error",
                message=f"{rec['bound_id']}: margin {margin!r} vs rhs - lhs_sup {rhs - lhs!r}",
            ))
        coarse = _number(rec.get("lhs_sup_coarse"))
        if coarse is not None and math.isfinite(lhs) and math.isfinite(coarse):
            results.append(ValidationResult(
                check_name=f"record[{index}].nesting", passed=coarse <= lhs, severity="error",
                message=f"{rec['bound_id']}: supremum over a subgrid {coarse!r} above the full-grid {lhs!r}",
            ))
        change = _number(rec.get("refinement_change"))
        if change is not None and math.isfinite(change):
            results.append(ValidationResult(
                check_name=f"record[{index}].refinement", passed=change <= REFINEMENT_TOL, severity="warning",
                message=f"{rec['bound_id']}: supremum rose by {change:.2%} when the grid density doubled",
                details={"refinement_change": change},
            ))
        return results

    @staticmethod
    def is_valid(results: List[ValidationResult]) -> bool:
        """True when no error-severity check failed."""
        return all(r.passed or r.severity != "error" for r in results)
