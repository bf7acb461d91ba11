"""JSON formats for problems, reports, certificates and lifted operators.

Floats are written with Python's shortest round-trip ``repr`` (at most 17
significant digits), so every number read back is bitwise the one written.
A complex entry is a two-element array ``[re, im]``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .certificate import BOUNDS_ONLY, EXACT, CertBlock, Certificate
from .conitope import Vertex
from .errors import InputError
from .lift import CONE_KINDS, HERM, SYM, lift_set, lifted_dim, smat_array, svec_array, SymPoint
from .matrix_core import MatrixSet

CERT_FORMAT = "conijsr-certificate"
CERT_VERSION = 1


def _float(x):
    # JSON has no infinity: an unbounded value is written as null
    x = float(x)
    return x if math.isfinite(x) else None


def _number(x, field):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{field}: expected a number, got {json.dumps(x)}")
    if not math.isfinite(x):
        raise InputError(f"{field}: entry is not finite")
    return x


def _entry(x, field, allow_complex):
    if isinstance(x, list):
        if not allow_complex:
            raise InputError(f"{field}: complex entry [re, im] in a real problem; set \"scalar\": \"complex\"")
        if len(x) != 2:
            raise InputError(f"{field}: a complex entry must be [re, im]")
        return complex(_number(x[0], field + "[0]"), _number(x[1], field + "[1]"))
    return _number(x, field)


def _matrix(rows, field, allow_complex):
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{field}: expected a nonempty array of rows")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise InputError(f"{field}[{i}]: expected an array of entries")
        out.append([_entry(x, f"{field}[{i}][{j}]", allow_complex) for j, x in enumerate(row)])
    width = len(out[0])
    for i, row in enumerate(out):
        if len(row) != width:
            raise InputError(f"{field}[{i}]: row has {len(row)} entries, expected {width}")
    if width != len(out):
        raise InputError(f"{field}: matrix is not square ({len(out)}x{width})")
    return np.array(out, dtype=complex if allow_complex else float)


def _encode_matrix(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return [[[_float(x.real), _float(x.imag)] for x in row] for row in a]
    return [[_float(x) for x in row] for row in a]


def _loads(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _dumps(doc):
    return json.dumps(doc, indent=1) + "\n"


# problems


def problem_from_dict(doc):
    if not isinstance(doc, dict):
        raise InputError("problem: expected a JSON object")
    scalar = doc.get("scalar", "real")
    if scalar not in ("real", "complex"):
        raise InputError(f"scalar: expected \"real\" or \"complex\", got {json.dumps(scalar)}")
    mats = doc.get("matrices")
    if not isinstance(mats, list) or not mats:
        raise InputError("matrices: expected a nonempty array of matrices")
    arrays = [_matrix(m, f"matrices[{i}]", scalar == "complex") for i, m in enumerate(mats)]
    n = doc.get("n")
    if n is not None:
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise InputError("n: expected a positive integer")
    for i, a in enumerate(arrays):
        ref = n if n is not None else arrays[0].shape[0]
        if a.shape[0] != ref:
            raise InputError(f"matrices[{i}]: inconsistent dimension {a.shape[0]}, expected {ref}")
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != len(arrays)):
        raise InputError("labels: expected one label per matrix")
    # a "complex" problem whose entries are all real is treated as real
    return MatrixSet(arrays, labels)


def parse_problem(path):
    """Read a problem file into a validated MatrixSet."""
    return problem_from_dict(_loads(_read(path), str(path)))


def problem_to_dict(mset):
    doc = {"scalar": mset.scalar_kind, "n": mset.n, "matrices": [_encode_matrix(a) for a in mset]}
    if mset.labels is not None:
        doc["labels"] = list(mset.labels)
    return doc


def emit_problem(mset, path=None):
    text = _dumps(problem_to_dict(mset))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# certificates


def _coords(arr):
    return [_float(x) for x in arr]


def certificate_to_dict(cert, n=None):
    blocks = []
    for b in cert.blocks:
        if b.seed_coords is not None and len(b.seed_coords) == len(b.seeds):
            seeds = [_coords(c) for c in b.seed_coords]
        else:
            seeds = [_coords(svec_array(s.entries, b.kind)) for s in b.seeds]
        verts = []
        for v in b.vertices:
            coords = v.coords if v.coords is not None else svec_array(v.point.entries, b.kind)
            verts.append({"svec": _coords(coords), "word": list(v.word), "scale_log": _float(v.scale_log), "seed": v.seed})
        blocks.append(
            {
                "cone": b.kind,
                "scale": _float(b.scale),
                "bound_factor": _float(b.bound_factor),
                "basis": None if b.basis is None else _encode_matrix(b.basis),
                "smp_word": list(b.smp_word),
                "smp_value": _float(b.smp_value),
                "classical_depth": b.classical_depth,
                "seeds": seeds,
                "vertices": verts,
            }
        )
    doc = {
        "format": CERT_FORMAT,
        "version": CERT_VERSION,
        "kind": cert.kind,
        "algorithm": cert.algorithm,
        "smp_word": list(cert.smp_word),
        "smp_value": _float(cert.smp_value),
        "lower": _float(cert.lower),
        "upper": _float(cert.upper),
        "tolerances": {k: _float(v) for k, v in cert.tolerances.items()},
        "blocks": blocks,
    }
    if n is not None:
        doc["n"] = n
    return doc


def _get(doc, key, field, kind=None):
    if key not in doc:
        raise InputError(f"{field}.{key}: missing")
    val = doc[key]
    if kind is float:
        return float(_number(val, f"{field}.{key}")) if val is not None else math.inf
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise InputError(f"{field}.{key}: expected an integer")
        return val
    if kind is list and not isinstance(val, list):
        raise InputError(f"{field}.{key}: expected an array")
    return val


def _word(val, field):
    if not isinstance(val, list) or any(isinstance(i, bool) or not isinstance(i, int) or i < 0 for i in val):
        raise InputError(f"{field}: expected an array of nonnegative integers")
    return tuple(val)


def _svec(val, field, d):
    if not isinstance(val, list):
        raise InputError(f"{field}: expected an array of numbers")
    arr = np.array([_number(x, f"{field}[{i}]") for i, x in enumerate(val)], dtype=float)
    if arr.size != d:
        raise InputError(f"{field}: has {arr.size} coordinates, expected {d}")
    return arr


def _block_dim(d, kind, field):
    k = math.isqrt(d) if kind == HERM else (math.isqrt(8 * d + 1) - 1) // 2
    if lifted_dim(k, kind) != d:
        raise InputError(f"{field}: {d} coordinates do not match any dimension for the {kind} cone")
    return k


def _parse_block(doc, i, n):
    field = f"blocks[{i}]"
    if not isinstance(doc, dict):
        raise InputError(f"{field}: expected an object")
    kind = _get(doc, "cone", field)
    if kind not in CONE_KINDS:
        raise InputError(f"{field}.cone: expected one of {list(CONE_KINDS)}")
    basis = doc.get("basis")
    if basis is not None:
        rows = basis
        cplx = bool(rows) and isinstance(rows[0], list) and bool(rows[0]) and isinstance(rows[0][0], list)
        mat = [[_entry(x, f"{field}.basis[{r}][{c}]", cplx) for c, x in enumerate(row)] for r, row in enumerate(rows)]
        basis = np.array(mat, dtype=complex if cplx else float)
        if basis.ndim != 2 or (n is not None and basis.shape[0] != n):
            raise InputError(f"{field}.basis: expected {n} rows")
    seeds_raw = _get(doc, "seeds", field, list)
    verts_raw = _get(doc, "vertices", field, list)
    first = (seeds_raw or [v.get("svec") for v in verts_raw if isinstance(v, dict)] or [None])[0]
    dim = None
    if basis is not None:
        dim = basis.shape[1]
    elif n is not None:
        dim = n
    elif isinstance(first, list):
        dim = _block_dim(len(first), kind, field)
    seed_coords, seeds = [], []
    for j, s in enumerate(seeds_raw):
        c = _svec(s, f"{field}.seeds[{j}]", lifted_dim(dim, kind))
        seed_coords.append(c)
        seeds.append(SymPoint(smat_array(c, dim, kind), kind))
    verts = []
    for j, v in enumerate(verts_raw):
        vf = f"{field}.vertices[{j}]"
        if not isinstance(v, dict):
            raise InputError(f"{vf}: expected an object")
        c = _svec(_get(v, "svec", vf), vf + ".svec", lifted_dim(dim, kind))
        verts.append(
            Vertex(
                SymPoint(smat_array(c, dim, kind), kind),
                _word(_get(v, "word", vf), vf + ".word"),
                _get(v, "scale_log", vf, float),
                _get(v, "seed", vf, int),
                coords=c,
            )
        )
    return CertBlock(
        scale=_get(doc, "scale", field, float),
        kind=kind,
        seeds=seeds,
        vertices=verts,
        bound_factor=_get(doc, "bound_factor", field, float),
        basis=basis,
        smp_word=_word(doc.get("smp_word", []), field + ".smp_word"),
        smp_value=_get(doc, "smp_value", field, float),
        classical_depth=_get(doc, "classical_depth", field, int),
        seed_coords=seed_coords,
    )


def certificate_from_dict(doc):
    if not isinstance(doc, dict):
        raise InputError("certificate: expected a JSON object")
    if doc.get("format") != CERT_FORMAT:
        raise InputError(f"format: expected {json.dumps(CERT_FORMAT)}")
    kind = doc.get("kind")
    if kind not in (EXACT, BOUNDS_ONLY):
        raise InputError(f"kind: expected \"{EXACT}\" or \"{BOUNDS_ONLY}\"")
    n = doc.get("n")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 1):
        raise InputError("n: expected a positive integer")
    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise InputError("tolerances: expected an object")
    blocks = [_parse_block(b, i, n) for i, b in enumerate(_get(doc, "blocks", "certificate", list))]
    return Certificate(
        kind=kind,
        smp_word=_word(doc.get("smp_word", []), "smp_word"),
        smp_value=_get(doc, "smp_value", "certificate", float),
        lower=_get(doc, "lower", "certificate", float),
        upper=_get(doc, "upper", "certificate", float),
        blocks=blocks,
        tolerances={k: float(_number(v, f"tolerances.{k}")) for k, v in tols.items()},
        algorithm=doc.get("algorithm", ""),
    )


def certificate_dimension(doc):
    """The ``n`` recorded in a certificate document, or ``None``."""
    return doc.get("n") if isinstance(doc, dict) else None


def emit_certificate(cert, path=None, n=None):
    text = _dumps(certificate_to_dict(cert, n))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def parse_certificate(path):
    """Read a certificate file; returns ``(certificate, n)``."""
    doc = _loads(_read(path), str(path))
    cert = certificate_from_dict(doc)
    return cert, certificate_dimension(doc)


# reports


def report_to_dict(result, certificate=None, n=None):
    """Report document for a JsrResult.

    ``certificate`` may be a path to reference instead of embedding the
    certificate itself.
    """
    return {
        "lower": _float(result.lower),
        "upper": _float(result.upper),
        "exact": bool(result.exact),
        "smp_word": list(result.smp.word) if result.smp else [],
        "smp_value": _float(result.smp.value) if result.smp else 0.0,
        "algorithm": result.algorithm,
        "steps": result.steps,
        "total_steps": result.total_steps,
        "restarts": result.restarts,
        "vertex_count": result.vertex_count,
        "iterations": [
            {k: (_float(v) if isinstance(v, float) else v) for k, v in s.as_dict().items()} for s in result.history
        ],
        "certificate": certificate if certificate is not None else certificate_to_dict(result.certificate, n),
        "tolerances": {k: _float(v) for k, v in result.certificate.tolerances.items()},
        "runtime_ms": _float(result.runtime_ms),
    }


def bounds_report(bounds, depth, runtime_ms, tol=1e-12):
    return {
        "lower": _float(bounds.lower),
        "upper": _float(bounds.upper),
        "exact": bool(bounds.upper - bounds.lower <= tol * (1.0 + bounds.lower)),
        "smp_word": list(bounds.lower_word),
        "smp_value": _float(bounds.lower),
        "depth": depth,
        "depth_reached": bounds.depth_reached,
        "truncated": bounds.truncated,
        "iterations": [],
        "certificate": None,
        "tolerances": {"tol_exact": tol},
        "runtime_ms": _float(runtime_ms),
    }


def emit_report(doc, path=None):
    text = _dumps(doc)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def parse_report(path):
    doc = _loads(_read(path), str(path))
    if not isinstance(doc, dict):
        raise InputError("report: expected a JSON object")
    for key in ("lower", "upper", "exact"):
        if key not in doc:
            raise InputError(f"{key}: missing")
    return doc


# lifted operators


def lifted_to_dict(mset):
    ops = lift_set(mset)
    kind = ops[0].kind
    return {
        "cone": kind,
        "n": mset.n,
        "d": ops[0].d,
        "svec": "upper triangle row by row; off-diagonal entries scaled by sqrt(2)"
        + ("" if kind == SYM else ", real part then imaginary part"),
        "operators": [{"word": list(op.source_word), "matrix": _encode_matrix(op.rep)} for op in ops],
    }


def lifted_from_dict(doc):
    """Operators of a lifted file as real ``d x d`` arrays."""
    ops = _get(doc, "operators", "lifted", list)
    return [_matrix(op["matrix"], f"operators[{i}].matrix", False) for i, op in enumerate(ops)]
