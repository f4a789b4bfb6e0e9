"""File utilities: report writing and input loading."""

import csv
import io
import json
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from pydantic import ValidationError

from ..models.config import CertifyConfig
from ..models.params import CumulantVector, VGParams
from .helpers import flatten_dict, format_cell, json_safe

logger = logging.getLogger(__name__)


class FileManagerError(Exception):
    """Custom exception for file management operations."""
    pass


class ReportWriter:
    """Writes report documents as JSON or flat CSV.

    JSON keys are sorted and floats use the shortest round-trip repr, so the
    same document always serialises to the same bytes. CSV flattens nested
    records with dotted column names and prints floats with 17 significant
    digits.
    """

    def to_json(self, data: Dict[str, Any]) -> str:
        """Serialise a document to JSON text."""
        return json.dumps(json_safe(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_csv(self, records: Sequence[Dict[str, Any]]) -> str:
        """Serialise records to CSV text, one row per record."""
        rows = [flatten_dict(rec) for rec in records]
        columns = sorted({key for row in rows for key in row})
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_cell(row.get(key)) for key in columns})
        return buffer.getvalue()

    def save_json(self, data: Dict[str, Any], file_path: Optional[Path] = None) -> None:
        """Save a document as JSON, to stdout when no path is given.

        Args:
            data: Document to save
            file_path: Target file path
        """
        self._write(self.to_json(data), file_path)

    def _write(self, text: str, file_path: Optional[Path]) -> None:
        if file_path is None:
            sys.stdout.write(text)
            return
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text(text, encoding='utf-8')
            logger.info(f"Saved report: {file_path}")
        except OSError as e:
            raise FileManagerError(f"Failed to save report to '{file_path}': {e}") from e


# ================================
# Loaders
# ================================

def _load_mapping(file_path: Path) -> Dict[str, Any]:
    """Parse a JSON, TOML or YAML file into a mapping."""
    suffix = file_path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(file_path.read_text(encoding='utf-8'))
        elif suffix == ".toml":
            data = tomllib.loads(file_path.read_text(encoding='utf-8'))
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(file_path.read_text(encoding='utf-8')) or {}
        else:
            raise FileManagerError(f"Unsupported config format '{suffix}' (use .json, .toml or .yaml)")
    except (OSError, json.JSONDecodeError, tomllib.TOMLDecodeError, yaml.YAMLError) as e:
        raise FileManagerError(f"Failed to read '{file_path}': {e}") from e
    if not isinstance(data, dict):
        raise FileManagerError(f"'{file_path}' must contain a mapping at the top level")
    return data


def load_certify_config(file_path: Path, overrides: Optional[Dict[str, Any]] = None) -> CertifyConfig:
    """Load a certification config file; unknown keys are rejected.

    Raises:
        FileManagerError: If the file cannot be read or does not validate
    """
    data = _load_mapping(file_path)
    data.update(overrides or {})
    try:
        config = CertifyConfig(**data)
    except ValidationError as e:
        raise FileManagerError(f"Invalid certification config '{file_path}': {e}") from e
    logger.debug(f"Loaded certification config from {file_path}")
    return config


def load_sample_csv(file_path: Path) -> np.ndarray:
    """Read one value per line; a non-numeric first line is taken as a header.

    Raises:
        FileManagerError: For unreadable files or non-numeric values
    """
    try:
        with open(file_path, newline='', encoding='utf-8') as f:
            rows = [row for row in csv.reader(f) if row and row[0].strip()]
    except OSError as e:
        raise FileManagerError(f"Failed to read sample '{file_path}': {e}") from e

    values: List[float] = []
    for i, row in enumerate(rows):
        try:
            values.append(float(row[0]))
        except ValueError:
            if i == 0:
                continue
            raise FileManagerError(f"Non-numeric value '{row[0]}' on data row {i + 1} of '{file_path}'") from None
    logger.debug(f"Loaded {len(values)} sample values from {file_path}")
    return np.asarray(values, dtype=float)


def load_cumulants(file_path: Path) -> Tuple[Optional[VGParams], CumulantVector, Optional[str]]:
    """Read cumulants of F (and optionally the target law) from a config file.

    ``kappa`` is either a list κ1..κ6 or a mapping with kappa1..kappa6 keys;
    ``target`` (optional) holds r, theta, sigma; ``note`` is carried through.

    Raises:
        FileManagerError: For missing or malformed entries
    """
    data = _load_mapping(file_path)
    if "kappa" not in data:
        raise FileManagerError(f"'{file_path}' has no 'kappa' entry")
    raw = data["kappa"]
    try:
        if isinstance(raw, list):
            if len(raw) != 6:
                raise FileManagerError(f"'kappa' must list six cumulants, got {len(raw)}")
            kappa = CumulantVector(**{f"kappa{k}": float(v) for k, v in enumerate(raw, start=1)})
        else:
            kappa = CumulantVector(**raw)
        target = VGParams(**data["target"]) if "target" in data else None
    except (ValidationError, TypeError, ValueError) as e:
        raise FileManagerError(f"Invalid cumulant file '{file_path}': {e}") from e
    return target, kappa, data.get("note")
