"""
Input/Output for tensor files and experiment output.

Tensor files are JSON objects
    {"m": int, "n": int, "scalar_mode": "real" | "complex", "coeffs": [...]}
with coeffs flat in lexicographic (row-major) order and complex entries
stored as [re, im] pairs. Floats are written with their shortest
round-trip representation, so save/load is bit-exact.

Experiment output is JSON (one object per line in batch output), CSV with
a fixed column order, and whitespace-separated plot files.

Functions:
    form_to_dict / form_from_dict: Tensor JSON object <-> MultilinearForm
    validate_form_file: Check a tensor file and return its metadata
    load_form / save_form: Tensor file I/O
    dumps_json: Deterministic JSON text
    write_json_lines / write_csv / write_plot_file: Experiment output
"""

import csv
import io
import json
import logging
import math
from typing import Any, Dict, Iterable, List, Sequence, TextIO, Tuple

import numpy as np

from .errors import DiagsumError, FormFileError
from .forms import COMPLEX, REAL, MultilinearForm

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "m", "n", "p_list", "s", "regime", "theoretical_constant", "measured_ratio",
    "norm_value", "norm_kind", "form_descriptor", "seed",
)


def form_to_dict(T: MultilinearForm) -> Dict[str, Any]:
    """
    Serialize a form to its JSON object.

    Examples:
        >>> from diagsum.forms import product_form
        >>> form_to_dict(product_form(2, 2))["coeffs"]
        [1.0, 0.0, 0.0, 1.0]
    """
    flat = T.coeffs.reshape(-1)
    if T.scalar_mode == COMPLEX:
        coeffs = [[float(z.real), float(z.imag)] for z in flat]
    else:
        coeffs = [float(x) for x in flat]
    return {"m": T.order, "n": T.dim, "scalar_mode": T.scalar_mode, "coeffs": coeffs}


def form_from_dict(data: Dict[str, Any]) -> MultilinearForm:
    """
    Rebuild a form from its JSON object.

    Raises:
        FormFileError: Missing keys, wrong coefficient count or bad entries.
    """
    try:
        m, n = int(data["m"]), int(data["n"])
        mode = data.get("scalar_mode", REAL)
        coeffs = data["coeffs"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormFileError(f"Tensor object is missing a field: {e}")
    if mode not in (REAL, COMPLEX):
        raise FormFileError(f"Unknown scalar_mode {mode!r}")
    try:
        if mode == COMPLEX:
            pairs = np.asarray(coeffs, dtype=np.float64)
            if pairs.ndim != 2 or pairs.shape[1] != 2:
                raise ValueError("complex coefficients must be [re, im] pairs")
            flat = pairs[:, 0] + 1j * pairs[:, 1]
        else:
            flat = np.asarray(coeffs, dtype=np.float64)
        return MultilinearForm.from_flat(m, n, flat, mode)
    except DiagsumError as e:
        raise FormFileError(f"Inconsistent tensor object: {e}")
    except (TypeError, ValueError) as e:
        raise FormFileError(f"Bad coefficient list: {e}")


def validate_form_file(filepath: str) -> Dict[str, Any]:
    """
    Validate a tensor file and extract its metadata.

    Returns:
        Dictionary with filepath, m, n, scalar_mode and coefficient count.

    Raises:
        FormFileError: If the file is missing, not JSON or inconsistent.
    """
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise FormFileError(f"Failed to read tensor file {filepath}: {e}")
    if not isinstance(data, dict):
        raise FormFileError(f"Tensor file {filepath} must hold a JSON object")
    T = form_from_dict(data)
    metadata = {
        "filepath": filepath,
        "m": T.order,
        "n": T.dim,
        "scalar_mode": T.scalar_mode,
        "coefficients": T.coeffs.size,
    }
    logger.debug(f"Tensor file validated: {metadata}")
    return metadata


def load_form(filepath: str) -> MultilinearForm:
    """
    Load a form from a tensor JSON file.

    Raises:
        FormFileError: If the file cannot be read or is inconsistent.
    """
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise FormFileError(f"Failed to load tensor file {filepath}: {e}")
    T = form_from_dict(data)
    logger.info(f"Loaded form: m={T.order}, n={T.dim}, scalar_mode={T.scalar_mode} from {filepath}")
    return T


def save_form(filepath: str, T: MultilinearForm) -> None:
    """
    Save a form as a tensor JSON file.

    Raises:
        FormFileError: If the coefficients are not finite or the write fails.
    """
    if not np.all(np.isfinite(T.coeffs)):
        raise FormFileError("Cannot serialize a form with non-finite coefficients")
    try:
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(dumps_json(form_to_dict(T)))
            f.write("\n")
    except OSError as e:
        raise FormFileError(f"Failed to save tensor file {filepath}: {e}")
    logger.info(f"Saved form to {filepath}")


def dumps_json(data: Any) -> str:
    """Compact deterministic JSON (insertion-ordered keys, repr floats, no NaN)."""
    return json.dumps(data, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def write_json_lines(stream: TextIO, objects: Iterable[Dict[str, Any]]) -> None:
    for obj in objects:
        stream.write(dumps_json(obj))
        stream.write("\n")


def write_csv(stream: TextIO, rows: Iterable[Dict[str, Any]],
              columns: Sequence[str] = CSV_COLUMNS) -> None:
    """Write rows with a fixed column order; missing fields stay empty."""
    writer = csv.DictWriter(stream, fieldnames=list(columns), restval="",
                            extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def csv_text(rows: Iterable[Dict[str, Any]], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buffer = io.StringIO()
    write_csv(buffer, rows, columns)
    return buffer.getvalue()


def write_plot_file(filepath: str, rows: Sequence[Tuple[float, float]],
                    header: str = "ln_n ln_C") -> None:
    """Two-column whitespace-separated plot data with a commented header."""
    try:
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(f"# {header}\n")
            for x, y in rows:
                f.write(f"{x!r} {y!r}\n")
    except OSError as e:
        raise DiagsumError(f"Failed to write plot file {filepath}: {e}")
    logger.info(f"Saved plot data ({len(rows)} rows) to {filepath}")


def read_plot_file(filepath: str) -> List[Tuple[float, float]]:
    rows = []
    with open(filepath, "r", encoding="utf-8") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            x, y = line.split()
            rows.append((float(x), float(y)))
    return rows


def format_number(value: float) -> str:
    """Human-readable number for tables: integers without a trailing .0."""
    if math.isinf(value) or math.isnan(value):
        return str(value)
    return f"{value:.12g}"
