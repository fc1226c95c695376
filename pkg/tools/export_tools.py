"""
Artifact export tools for simulation runs
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

CSV_FORMAT = "%.12e"


class BaseTool:
    """Small tool interface shared by the exporters."""
    name: str = ""
    description: str = ""

    def _run(self, *args, **kwargs):
        raise NotImplementedError


class CsvExportTool(BaseTool):
    """Writes named columns as a deterministic CSV time series."""

    name: str = "CSV Exporter"
    description: str = "Writes equal-length numeric columns with fixed formatting and a header row"

    def _run(self, path: Union[str, Path], columns: Mapping[str, Any]) -> Path:
        """
        Write ``columns`` to ``path`` in insertion order.

        Args:
            path: Destination file
            columns: Header name -> 1-D numeric array

        Returns:
            The written path
        """
        if not columns:
            raise ValueError("No columns to export")
        names = list(columns)
        arrays = [np.asarray(columns[name], dtype=float).ravel() for name in names]
        lengths = {a.size for a in arrays}
        if len(lengths) != 1:
            raise ValueError(f"Columns have different lengths: {dict(zip(names, (a.size for a in arrays)))}")

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, np.column_stack(arrays), fmt=CSV_FORMAT, delimiter=",",
                   header=",".join(names), comments="")
        return path


class ManifestTool(BaseTool):
    """Writes the JSON run manifest with sorted keys."""

    name: str = "Manifest Writer"
    description: str = "Serializes run results, checks and diagnostics to JSON"

    def _run(self, path: Union[str, Path], data: Mapping[str, Any]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(to_builtin(data), f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def to_builtin(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers into JSON-ready values."""
    if isinstance(value, Mapping):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_builtin(float(value.real)), to_builtin(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def make_check(value: Optional[float], tolerance: float, mode: str = "max") -> Dict[str, Any]:
    """
    Build a manifest check entry {value, tolerance, passed}.

    ``mode`` is "max" (value ≤ tolerance), "min" (value ≥ −tolerance) or
    "within" (|value| ≤ tolerance). A missing value fails.
    """
    if value is None or not np.isfinite(value):
        passed = False
    elif mode == "max":
        passed = value <= tolerance
    elif mode == "min":
        passed = value >= -tolerance
    elif mode == "within":
        passed = abs(value) <= tolerance
    else:
        raise ValueError(f"Unknown check mode {mode!r}")
    return {"value": value, "tolerance": tolerance, "passed": bool(passed)}
