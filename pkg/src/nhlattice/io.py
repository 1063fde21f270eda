"""Reproducible file output: CSV tables, JSON manifests and plot scripts."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from .steadystate import CovarianceMatrix

__all__ = [
    "MANIFEST_SCHEMA",
    "format_value",
    "write_csv",
    "read_csv",
    "write_manifest",
    "validate_manifest",
    "versions",
    "covariance_to_json",
    "covariance_from_json",
    "density_rows",
    "orbital_rows",
]

MANIFEST_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["experiment", "params", "residuals", "timings", "versions"],
    "properties": {
        "experiment": {"type": "string"},
        "params": {"type": "object"},
        "residuals": {
            "type": "object",
            "additionalProperties": {"type": ["number", "null"]},
        },
        "timings": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0},
        },
        "versions": {
            "type": "object",
            "additionalProperties": {"type": "string"},
        },
        "outputs": {"type": "array", "items": {"type": "string"}},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}


def format_value(x):
    """17-significant-digit text for floats; integers and strings verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    """Write a comma-separated table with LF line endings."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def read_csv(path):
    """Header and float array of a table written by :func:`write_csv`."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.asarray(data)


def versions():
    from . import __version__

    return {
        "nhlattice": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def validate_manifest(doc):
    jsonschema.validate(doc, MANIFEST_SCHEMA)
    return doc


def write_manifest(path, doc):
    validate_manifest(doc)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return Path(path)


def _encode(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def covariance_to_json(cov):
    return json.dumps({"statistics": cov.statistics.value, "f": _encode(cov.f)})


def covariance_from_json(text):
    doc = json.loads(text)
    a = np.asarray(doc["f"], dtype=float)
    return CovarianceMatrix(a[..., 0] + 1j * a[..., 1], doc["statistics"])


def density_rows(densities):
    """``(site, occupation)`` rows with 1-based sites."""
    return [(j + 1, float(v)) for j, v in enumerate(densities)]


def orbital_rows(decomposition):
    """``(orbital, occupation, site, weight)`` rows, one per orbital and site."""
    rows = []
    amp = np.abs(decomposition.orbitals) ** 2
    for r, n_r in enumerate(decomposition.occupations):
        for j in range(amp.shape[0]):
            rows.append((r + 1, float(n_r), j + 1, float(amp[j, r])))
    return rows
