"""File input and output: series CSV, model JSON, reports and decompositions."""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from .exceptions import InputError
from .mme import BlupResult
from .models import ModelSpec

PathLike = Union[str, Path]

DECOMPOSITION_COLUMNS = (
    "t",
    "observed",
    "trend",
    "signal",
    "fitted",
    "conditional_residual",
    "marginal_residual",
    "beta_hat",
    "y_hat",
)


def _parse_float(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def read_series_csv(filepath: PathLike) -> np.ndarray:
    """Read the first column of a CSV file as a series.

    A first row whose first cell is not numeric is taken as a header.

    Raises:
        InputError: If the file is missing, empty or holds a non-numeric value
    """
    try:
        with open(filepath, newline="", encoding="utf-8") as f:
            rows = [row for row in csv.reader(f) if row and row[0].strip()]
    except OSError as e:
        raise InputError(f"Cannot read series file {filepath}: {e}") from e

    if rows and _parse_float(rows[0][0].strip()) is None:
        rows = rows[1:]
    if not rows:
        raise InputError(f"No observations in {filepath}")

    values = []
    for line, row in enumerate(rows, start=1):
        value = _parse_float(row[0].strip())
        if value is None:
            raise InputError(f"Non-numeric value {row[0]!r} in {filepath} (data row {line})")
        values.append(value)
    return np.asarray(values, dtype=float)


def log_series(series: Sequence[float]) -> np.ndarray:
    """Natural log of a positive series, such as weekly counts.

    Raises:
        InputError: If some value is not positive
    """
    values = np.asarray(series, dtype=float)
    if np.any(values <= 0):
        first = int(np.flatnonzero(values <= 0)[0]) + 1
        raise InputError(f"Cannot log-transform the series: value {values[first - 1]!r} at t={first} is not positive")
    return np.log(values)


def read_json(filepath: PathLike) -> Dict[str, Any]:
    try:
        with open(filepath, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InputError(f"Cannot read {filepath}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"Invalid JSON in {filepath}: {e}") from e


def read_model_json(filepath: PathLike, n: Optional[int] = None) -> ModelSpec:
    """Load a model config; ``n`` fills in a missing "n" (e.g. the series length).

    Raises:
        InputError: If the file is unreadable, the config is invalid, or its "n"
            disagrees with the given n
    """
    data = read_json(filepath)
    if n is not None and data.get("n") is not None and data["n"] != n:
        raise InputError(f"series has {n} observations but the model expects n={data['n']}")
    try:
        return ModelSpec.from_dict(data, n=n)
    except (ValidationError, ValueError) as e:
        raise InputError(f"Invalid model config {filepath}: {e}") from e


def to_json(data: Union[BaseModel, Dict[str, Any], List[Any]], indent: int = 2) -> str:
    """Serialize a model or plain data to JSON.

    Floats are written with ``repr``, which round-trips doubles exactly.
    """
    if hasattr(data, "to_dict"):
        data = data.to_dict()  # type: ignore[union-attr]
    elif isinstance(data, BaseModel):
        data = data.model_dump(mode="json", exclude_none=True)
    return json.dumps(data, indent=indent, ensure_ascii=False)


def decomposition_rows(series: Sequence[float], blup: BlupResult) -> Iterable[List[Any]]:
    x = np.asarray(series, dtype=float)
    k, l = blup.beta_hat.size, blup.y_hat.size  # noqa: E741
    for t in range(x.size):
        yield [
            t + 1,
            repr(float(x[t])),
            repr(float(blup.trend[t])),
            repr(float(blup.signal[t])),
            repr(float(blup.fitted[t])),
            repr(float(blup.conditional_residuals[t])),
            repr(float(blup.marginal_residuals[t])),
            repr(float(blup.beta_hat[t])) if t < k else "",
            repr(float(blup.y_hat[t])) if t < l else "",
        ]


def coefficients_to_dict(blup: BlupResult) -> Dict[str, Any]:
    return {
        "nu": blup.nu.tolist(),
        "beta": blup.beta_hat.tolist(),
        "y": blup.y_hat.tolist(),
    }


def to_decomposition_csv(series: Sequence[float], blup: BlupResult) -> str:
    lines = [",".join(DECOMPOSITION_COLUMNS)]
    lines.extend(",".join(str(cell) for cell in row) for row in decomposition_rows(series, blup))
    return "\n".join(lines) + "\n"


def to_replicates_csv(replicates: np.ndarray) -> str:
    """One row per t, one column per replicate."""
    count, n = replicates.shape
    lines = [",".join(["t"] + [f"rep_{i}" for i in range(count)])]
    for t in range(n):
        lines.append(",".join([str(t + 1)] + [repr(float(v)) for v in replicates[:, t]]))
    return "\n".join(lines) + "\n"


def export_to_file(content: Any, filepath: PathLike, format: str = "json") -> None:
    """Write a report, dict or prepared CSV text to a file.

    Args:
        content: Pydantic model, dict or list for 'json'; CSV text for 'csv'
        filepath: Output file path
        format: Export format ('json' or 'csv')

    Raises:
        ValueError: If format is not supported or content does not match it
    """
    format = format.lower()

    if format == "json":
        if isinstance(content, str):
            raise ValueError("json export expects a model, dict or list, not serialized text")
        text = to_json(content) + "\n"
    elif format == "csv":
        if not isinstance(content, str):
            raise ValueError("csv export expects prepared CSV text")
        text = content
    else:
        raise ValueError(f"Unsupported format: {format}. Use 'json' or 'csv'")

    with open(filepath, "w", encoding="utf-8", newline="") as f:
        f.write(text)
