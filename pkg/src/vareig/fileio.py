"""JSON formats for matrices, state vectors and result files.

Matrix: ``{"dim": n, "rows": [[[re, im], ...], ...]}`` with an optional
``"kind": "density"`` tag. State: ``{"dim": n, "amplitudes": [[re, im], ...]}``.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .numerics import as_matrix, require_density
from .simulator import as_state

RESULT_SCHEMA = 1


def _load_json(path):
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"{path}: file not found", kind="file_not_found")
    text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise ValidationError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg} near {line.strip()[:60]!r}",
            kind="parse_error",
        ) from exc


def _complex(entry, where):
    if (
        not isinstance(entry, (list, tuple))
        or len(entry) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
    ):
        raise ValidationError(f"{where}: expected [re, im], got {entry!r}", kind="parse_error")
    re, im = float(entry[0]), float(entry[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValidationError(f"{where}: non-finite entry", kind="non_finite")
    return complex(re, im)


def matrix_from_json(obj, source="matrix") -> np.ndarray:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise ValidationError(f"{source}: expected an object with 'rows'", kind="parse_error")
    rows = obj["rows"]
    if not isinstance(rows, list) or not rows:
        raise ValidationError(f"{source}: 'rows' must be a non-empty list", kind="parse_error")
    n = len(rows)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ValidationError(
                f"{source}: row {i} has length {got}, expected {n} (matrix must be square)",
                kind="dimension",
            )
    if "dim" in obj and obj["dim"] != n:
        raise ValidationError(f"{source}: dim {obj['dim']} but {n} rows", kind="dimension")
    m = np.array(
        [[_complex(x, f"{source}[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(rows)]
    )
    m = as_matrix(m)
    if obj.get("kind") == "density":
        m = require_density(m, name=source)
    return m


def parse_matrix_file(path) -> np.ndarray:
    return matrix_from_json(_load_json(path), str(path))


def matrix_to_json(m, kind=None) -> dict:
    m = np.asarray(m, dtype=complex)
    out = {"dim": len(m), "rows": [[[float(x.real), float(x.imag)] for x in row] for row in m]}
    if kind:
        out["kind"] = kind
    return out


def write_matrix_file(path, m, kind=None):
    atomic_write_text(path, json.dumps(matrix_to_json(m, kind)) + "\n")


def parse_state_file(path) -> np.ndarray:
    obj = _load_json(path)
    if not isinstance(obj, dict) or not isinstance(obj.get("amplitudes"), list):
        raise ValidationError(f"{path}: expected an object with 'amplitudes'", kind="parse_error")
    amps = np.array([_complex(x, f"{path}[{i}]") for i, x in enumerate(obj["amplitudes"])])
    if "dim" in obj and obj["dim"] != len(amps):
        raise ValidationError(f"{path}: dim {obj['dim']} but {len(amps)} amplitudes", kind="dimension")
    return as_state(amps)


def state_to_json(psi) -> dict:
    psi = np.asarray(psi, dtype=complex)
    return {"dim": len(psi), "amplitudes": [[float(x.real), float(x.imag)] for x in psi]}


def write_state_file(path, psi):
    atomic_write_text(path, json.dumps(state_to_json(psi)) + "\n")


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jsonable(obj):
    """Recursively convert numpy values and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def result_path(out, command, seed) -> Path:
    """``out`` ending in ``.json`` is used as is; otherwise it is a run
    directory and the file is named by command and seed, never overwriting."""
    out = Path(out)
    if out.suffix == ".json":
        return out
    stem = f"{command}-seed{seed}"
    candidate = out / f"{stem}.json"
    i = 1
    while candidate.exists():
        candidate = out / f"{stem}-{i}.json"
        i += 1
    return candidate


def write_result(path, payload: dict):
    atomic_write_text(path, json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")
