"""JSON encoding of systems, certificates, and reports.

One format rule everywhere: complex matrices are nested arrays of [re, im]
pairs, and log scales ride in separate real fields, never multiplied into
matrix entries. Balanced HermPD data round-trips byte-for-byte: parsing a
serialized matrix re-runs the balancing convention, which is a no-op on
already balanced input, and floats go through repr-exact JSON.
"""

from __future__ import annotations

import json

import numpy as np

from .equivalence import (
    GrowthDiagnostic,
    SimilarityCertificate,
    UnitaryEquivalenceResult,
    VerificationReport,
)
from .numerics import HermPD, hermpd
from .shiftcore import MomentSystem, ValidationReport, WeightSystem


class SchemaError(Exception):
    """A problem file does not match the schema; .path names the bad field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


def matrix_to_json(mat) -> list:
    arr = np.asarray(mat, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def matrix_from_json(data, path: str, expect_square: bool = True) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise SchemaError(path, "expected a non-empty nested array of [re, im] pairs")
    rows = []
    width = None
    for i, row in enumerate(data):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"{path}[{i}]", "expected a non-empty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(f"{path}[{i}]", "ragged matrix rows")
        out_row = []
        for k, entry in enumerate(row):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(v, (int, float)) for v in entry)):
                raise SchemaError(f"{path}[{i}][{k}]", "expected an [re, im] pair")
            out_row.append(complex(entry[0], entry[1]))
        rows.append(out_row)
    arr = np.array(rows, dtype=np.complex128)
    if expect_square and arr.shape[0] != arr.shape[1]:
        raise SchemaError(path, f"expected a square matrix, got {arr.shape}")
    return arr


def hermpd_to_json(h: HermPD) -> dict:
    return {"logscale": float(h.logscale), "matrix": matrix_to_json(h.matrix)}


def hermpd_from_json(data, path: str) -> HermPD:
    if not isinstance(data, dict):
        raise SchemaError(path, "expected an object with 'logscale' and 'matrix'")
    if "matrix" not in data:
        raise SchemaError(f"{path}.matrix", "missing")
    logscale = data.get("logscale", 0.0)
    if not isinstance(logscale, (int, float)):
        raise SchemaError(f"{path}.logscale", "expected a real number")
    mat = matrix_from_json(data["matrix"], f"{path}.matrix")
    return hermpd(mat, float(logscale))


def multiindex_to_json(alpha) -> list:
    return [int(a) for a in alpha]


def multiindex_from_json(data, path: str, d: int | None = None) -> tuple:
    if (not isinstance(data, list) or not data
            or not all(isinstance(a, int) and a >= 0 for a in data)):
        raise SchemaError(path, "expected an array of non-negative integers")
    if d is not None and len(data) != d:
        raise SchemaError(path, f"expected {d} components, got {len(data)}")
    return tuple(data)


def moment_system_to_json(ms: MomentSystem) -> dict:
    return {
        "type": "moments",
        "d": ms.d,
        "N": ms.N,
        "fiber_dim": ms.fiber_dim,
        "grams": [
            {"alpha": multiindex_to_json(alpha), **hermpd_to_json(ms.gram(alpha))}
            for alpha in ms.truncation()
        ],
    }


def weight_system_to_json(ws: WeightSystem, g0: HermPD) -> dict:
    return {
        "type": "weights",
        "d": ws.d,
        "N": ws.N,
        "fiber_dim": ws.fiber_dim,
        "g0": hermpd_to_json(g0),
        "weights": [
            {
                "alpha": multiindex_to_json(alpha),
                "j": j,
                "matrix": matrix_to_json(ws.weight(alpha, j)),
            }
            for alpha in ws.truncation().interior()
            for j in range(ws.d)
        ],
    }


def _require_int(data: dict, key: str, path: str, minimum: int) -> int:
    if key not in data:
        raise SchemaError(f"{path}.{key}", "missing")
    v = data[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise SchemaError(f"{path}.{key}", f"expected an integer >= {minimum}")
    return v


def moment_system_from_json(data: dict, path: str) -> MomentSystem:
    d = _require_int(data, "d", path, 1)
    top = _require_int(data, "N", path, 0)
    n = _require_int(data, "fiber_dim", path, 1)
    grams_field = data.get("grams")
    if not isinstance(grams_field, list):
        raise SchemaError(f"{path}.grams", "expected an array of Gram entries")
    grams = {}
    for i, entry in enumerate(grams_field):
        epath = f"{path}.grams[{i}]"
        if not isinstance(entry, dict) or "alpha" not in entry:
            raise SchemaError(epath, "expected an object with 'alpha'")
        alpha = multiindex_from_json(entry["alpha"], f"{epath}.alpha", d)
        h = hermpd_from_json(entry, epath)
        if h.dim != n:
            raise SchemaError(f"{epath}.matrix", f"expected dimension {n}, got {h.dim}")
        grams[alpha] = h
    try:
        return MomentSystem(d, top, n, grams)
    except ValueError as ex:
        raise SchemaError(f"{path}.grams", str(ex)) from ex


def weight_system_from_json(data: dict, path: str):
    """Returns (WeightSystem, G0)."""
    d = _require_int(data, "d", path, 1)
    top = _require_int(data, "N", path, 0)
    n = _require_int(data, "fiber_dim", path, 1)
    if "g0" not in data:
        raise SchemaError(f"{path}.g0", "missing")
    g0 = hermpd_from_json(data["g0"], f"{path}.g0")
    if g0.dim != n:
        raise SchemaError(f"{path}.g0.matrix", f"expected dimension {n}, got {g0.dim}")
    weights_field = data.get("weights")
    if not isinstance(weights_field, list):
        raise SchemaError(f"{path}.weights", "expected an array of weight entries")
    weights = {}
    for i, entry in enumerate(weights_field):
        epath = f"{path}.weights[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(epath, "expected an object")
        alpha = multiindex_from_json(entry.get("alpha"), f"{epath}.alpha", d)
        j = entry.get("j")
        if not isinstance(j, int) or isinstance(j, bool) or not 0 <= j < d:
            raise SchemaError(f"{epath}.j", f"expected an integer in 0..{d - 1}")
        if "matrix" not in entry:
            raise SchemaError(f"{epath}.matrix", "missing")
        mat = matrix_from_json(entry["matrix"], f"{epath}.matrix")
        if mat.shape != (n, n):
            raise SchemaError(f"{epath}.matrix", f"expected shape ({n}, {n})")
        weights[(alpha, j)] = mat
    try:
        return WeightSystem(d, top, n, weights), g0
    except ValueError as ex:
        raise SchemaError(f"{path}.weights", str(ex)) from ex


def certificate_to_json(cert: SimilarityCertificate) -> dict:
    return {
        "C": matrix_to_json(cert.C),
        "log_m1": float(cert.log_m1),
        "log_m2": float(cert.log_m2),
        "log_ratio": float(cert.log_ratio),
    }


def certificate_from_json(data, path: str) -> SimilarityCertificate:
    if not isinstance(data, dict):
        raise SchemaError(path, "expected a certificate object")
    for key in ("C", "log_m1", "log_m2"):
        if key not in data:
            raise SchemaError(f"{path}.{key}", "missing")
    for key in ("log_m1", "log_m2"):
        if not isinstance(data[key], (int, float)):
            raise SchemaError(f"{path}.{key}", "expected a real number")
    return SimilarityCertificate(
        C=matrix_from_json(data["C"], f"{path}.C"),
        log_m1=float(data["log_m1"]),
        log_m2=float(data["log_m2"]),
    )


def verification_to_json(report: VerificationReport) -> dict:
    return {
        "passes": report.passes,
        "tol": report.tol,
        "worst_lower_margin": report.worst_lower_margin,
        "worst_upper_margin": report.worst_upper_margin,
        "worst_lower_alpha": multiindex_to_json(report.worst_lower_alpha),
        "worst_upper_alpha": multiindex_to_json(report.worst_upper_alpha),
    }


def unitary_result_to_json(result: UnitaryEquivalenceResult) -> dict:
    out = {
        "equivalent": result.equivalent,
        "residual": result.residual,
        "message": result.message,
    }
    if result.V is not None:
        out["V"] = matrix_to_json(result.V)
    if result.witness is not None:
        out["witness_alpha"] = multiindex_to_json(result.witness)
    return out


def growth_to_json(diag: GrowthDiagnostic) -> dict:
    return {
        "verdict": diag.verdict,
        "slope": diag.slope,
        "intercept": diag.intercept,
        "r_squared": diag.r_squared,
        "table": [
            {"degree": int(n), "log_ratio": float(r)}
            for n, r in zip(diag.degrees, diag.log_ratios)
        ],
    }


def validation_to_json(report: ValidationReport) -> dict:
    return {
        "passes": report.passes,
        "max_commutation_residual": report.max_commutation_residual,
        "min_singular_ratio": report.min_singular_ratio,
        "max_weight_norm": report.max_weight_norm,
        "failures": list(report.failures),
    }


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, repr-exact floats."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
