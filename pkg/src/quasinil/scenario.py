"""Scenario files: JSON documents describing a space, a calibration, operators and vectors.

Complex entries are written ``[re, im]``; a bare number is read as a real.

.. code-block:: json

    {
      "space_dim": 2,
      "calibration": [{"name": "euclid", "matrix": [[1, 0], [0, 1]]}],
      "operators": {"T": [[1, 1], [0, 1]]},
      "vectors": {"x": [1, [0, 1]]},
      "settings": {"tol_rel": 1e-9}
    }
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np

from .calibration import Calibration
from .errors import DimensionMismatch, ParseError, ValidationError

SETTINGS_KEYS = {
    "tol_rel": float,
    "n_max": int,
    "cluster_tol": float,
    "support_tol": float,
    "allow_degenerate": bool,
}


@dataclass
class Scenario:
    space_dim: int
    calibration: List[Tuple[str, np.ndarray]]
    operators: Dict[str, np.ndarray]
    vectors: Dict[str, np.ndarray] = field(default_factory=dict)
    settings: Dict[str, Any] = field(default_factory=dict)

    def build_calibration(self) -> Calibration:
        return Calibration.from_matrices(
            dict(self.calibration), allow_degenerate=bool(self.settings.get("allow_degenerate", False))
        )

    def operator(self, name: str) -> np.ndarray:
        try:
            return self.operators[name]
        except KeyError:
            raise ValidationError(f"no operator named {name!r} (have {sorted(self.operators)})", "operators") from None

    def vector(self, name: str) -> np.ndarray:
        try:
            return self.vectors[name]
        except KeyError:
            raise ValidationError(f"no vector named {name!r} (have {sorted(self.vectors)})", "vectors") from None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "space_dim": self.space_dim,
            "calibration": [{"name": n, "matrix": encode_matrix(A)} for n, A in self.calibration],
            "operators": {k: encode_matrix(v) for k, v in self.operators.items()},
            "vectors": {k: [encode_complex(z) for z in v] for k, v in self.vectors.items()},
            "settings": dict(self.settings),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def encode_complex(z) -> Union[float, List[float]]:
    z = complex(z)
    if z.imag == 0.0 and math.copysign(1.0, z.imag) > 0:
        return z.real
    return [z.real, z.imag]


def encode_matrix(A) -> List[List[Any]]:
    return [[encode_complex(z) for z in row] for row in np.asarray(A)]


def _decode_complex(value, path) -> complex:
    if isinstance(value, bool):
        raise ValidationError("expected a number or [re, im]", path)
    if isinstance(value, (int, float)):
        z = complex(float(value), 0.0)
    elif isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        z = complex(float(value[0]), float(value[1]))
    else:
        raise ValidationError(f"expected a number or [re, im], got {value!r}", path)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("entries must be finite", path)
    return z


def _decode_vector(value, path) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError("expected a non-empty list", path)
    return np.array([_decode_complex(v, f"{path}[{i}]") for i, v in enumerate(value)], dtype=complex)


def _decode_matrix(value, path) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ValidationError("expected a non-empty list of rows", path)
    rows = [_decode_vector(r, f"{path}[{i}]") for i, r in enumerate(value)]
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("rows have different lengths", path)
    return np.vstack(rows)


def _name(value, path) -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError("names must be non-empty strings", path)
    return value


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    """Validate a decoded JSON document and build a :class:`Scenario`."""
    if not isinstance(doc, Mapping):
        raise ValidationError("scenario must be a JSON object", "$")
    unknown = set(doc) - {"space_dim", "calibration", "operators", "vectors", "settings"}
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}", "$")
    n = doc.get("space_dim")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("must be a positive integer", "space_dim")

    settings = doc.get("settings", {}) or {}
    if not isinstance(settings, Mapping):
        raise ValidationError("must be an object", "settings")
    clean_settings: Dict[str, Any] = {}
    for key, value in settings.items():
        if key not in SETTINGS_KEYS:
            raise ValidationError(f"unknown setting {key!r}", f"settings.{key}")
        kind = SETTINGS_KEYS[key]
        if kind is bool:
            ok = isinstance(value, bool)
        elif kind is int:
            ok = isinstance(value, int) and not isinstance(value, bool)
        else:
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if not ok:
            raise ValidationError(f"expected {kind.__name__}", f"settings.{key}")
        clean_settings[key] = value

    cal_doc = doc.get("calibration")
    if not isinstance(cal_doc, list) or not cal_doc:
        raise ValidationError("must be a non-empty list of {name, matrix}", "calibration")
    calibration: List[Tuple[str, np.ndarray]] = []
    for i, entry in enumerate(cal_doc):
        path = f"calibration[{i}]"
        if not isinstance(entry, Mapping) or set(entry) != {"name", "matrix"}:
            raise ValidationError("expected an object with keys name, matrix", path)
        name = _name(entry["name"], f"{path}.name")
        A = _decode_matrix(entry["matrix"], f"{path}.matrix")
        if A.shape[1] != n:
            raise DimensionMismatch(f"seminorm matrix has {A.shape[1]} columns, space_dim is {n}", f"{path}.matrix")
        calibration.append((name, A))
    names = [nm for nm, _ in calibration]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate seminorm names {names}", "calibration")

    ops_doc = doc.get("operators", {}) or {}
    if not isinstance(ops_doc, Mapping):
        raise ValidationError("must be an object", "operators")
    operators = {}
    for key, value in ops_doc.items():
        path = f"operators.{key}"
        A = _decode_matrix(value, path)
        if A.shape != (n, n):
            raise DimensionMismatch(f"operator has shape {A.shape}, expected ({n}, {n})", path)
        operators[_name(key, path)] = A

    vec_doc = doc.get("vectors", {}) or {}
    if not isinstance(vec_doc, Mapping):
        raise ValidationError("must be an object", "vectors")
    vectors = {}
    for key, value in vec_doc.items():
        path = f"vectors.{key}"
        v = _decode_vector(value, path)
        if v.shape != (n,):
            raise DimensionMismatch(f"vector has length {v.shape[0]}, expected {n}", path)
        vectors[_name(key, path)] = v

    scenario = Scenario(n, calibration, operators, vectors, clean_settings)
    scenario.build_calibration()
    return scenario


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """Read and validate a scenario file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scenario: {exc.strerror}", str(path)) from exc
    return loads_scenario(text, str(path))


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", source) from exc
    return scenario_from_dict(doc)
