"""JSON documents for states, operators, POVMs, instruments and channels.

Every complex entry is a ``[re, im]`` pair.  Documents look like::

    {"kind": "density", "dims": [2, 2], "data": [[[0.5, 0.0], ...], ...]}
    {"kind": "state", "dims": [2], "data": [[1.0, 0.0], [0.0, 0.0]]}
    {"kind": "povm", "dims": [2], "elements": [{"label": "0", "data": ...}, ...]}
    {"kind": "kraus", "d": 2, "ops": [matrix, ...]}
    {"kind": "superop", "d": 2, "ops": [matrix]}

Floats are written with Python's shortest round-trip repr, so
``loads(dumps(doc))`` reproduces every float64 bit for bit.  Schema errors
name the offending location as a JSON pointer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import channels, linalg, measurements, states
from .errors import QMError

OPERATOR_KINDS = ("density", "unitary", "operator")
VECTOR_KINDS = ("state",)
SET_KINDS = ("povm", "instrument")
CHANNEL_KINDS = ("kraus", "superop")
KINDS = OPERATOR_KINDS + VECTOR_KINDS + SET_KINDS + CHANNEL_KINDS


class SchemaError(QMError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


@dataclass(frozen=True, eq=False)
class MatrixDoc:
    """Parsed document.  Single-object kinds use ``data``; set and channel kinds
    use ``elements`` as ``(label, matrix)`` pairs."""

    kind: str
    dims: tuple[int, ...]
    data: np.ndarray | None = None
    elements: tuple[tuple[str, np.ndarray], ...] = ()

    @property
    def dim(self) -> int:
        return math.prod(self.dims)


# --- parsing -----------------------------------------------------------------


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _complex(entry, ptr: str) -> complex:
    if not isinstance(entry, list) or len(entry) != 2 or not all(_is_number(v) for v in entry):
        raise SchemaError(ptr, "entry must be a [re, im] pair of numbers")
    re, im = float(entry[0]), float(entry[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise SchemaError(ptr, "entry is not finite")
    return complex(re, im)


def _vector(data, n: int, ptr: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != n:
        raise SchemaError(ptr, f"expected a list of {n} entries")
    return np.array([_complex(e, f"{ptr}/{i}") for i, e in enumerate(data)], dtype=complex)


def _matrix(data, rows: int, cols: int, ptr: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != rows:
        raise SchemaError(ptr, f"expected {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        out[i] = _vector(row, cols, f"{ptr}/{i}")
    return out


def _dims(obj) -> tuple[int, ...]:
    if "dims" not in obj:
        raise SchemaError("/dims", "missing")
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims:
        raise SchemaError("/dims", "must be a nonempty list of positive integers")
    for i, d in enumerate(dims):
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise SchemaError(f"/dims/{i}", f"{d!r} is not a positive integer")
    n = math.prod(dims)
    if n > 4096:
        raise SchemaError("/dims", f"dimension {n} exceeds the cap")
    return tuple(dims)


def _field(obj, key: str):
    if key not in obj:
        raise SchemaError(f"/{key}", "missing")
    return obj[key]


def parse(obj) -> MatrixDoc:
    if not isinstance(obj, dict):
        raise SchemaError("", "document must be a JSON object")
    kind = _field(obj, "kind")
    if kind not in KINDS:
        raise SchemaError("/kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")

    if kind in CHANNEL_KINDS:
        d = _field(obj, "d")
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise SchemaError("/d", f"{d!r} is not a positive integer")
        ops = _field(obj, "ops")
        if not isinstance(ops, list) or not ops:
            raise SchemaError("/ops", "must be a nonempty list of matrices")
        n = d if kind == "kraus" else d * d
        if kind == "superop" and len(ops) != 1:
            raise SchemaError("/ops", "a superoperator document holds exactly one matrix")
        mats = tuple((str(k), _matrix(m, n, n, f"/ops/{k}")) for k, m in enumerate(ops))
        return MatrixDoc(kind, (d,), elements=mats)

    dims = _dims(obj)
    n = math.prod(dims)
    if kind in SET_KINDS:
        elems = _field(obj, "elements")
        if not isinstance(elems, list) or not elems:
            raise SchemaError("/elements", "must be a nonempty list")
        out = []
        for k, e in enumerate(elems):
            ptr = f"/elements/{k}"
            if not isinstance(e, dict):
                raise SchemaError(ptr, "element must be an object with label and data")
            label = e.get("label", str(k))
            if not isinstance(label, (str, int)) or isinstance(label, bool):
                raise SchemaError(f"{ptr}/label", "label must be a string or integer")
            if "data" not in e:
                raise SchemaError(f"{ptr}/data", "missing")
            out.append((str(label), _matrix(e["data"], n, n, f"{ptr}/data")))
        return MatrixDoc(kind, dims, elements=tuple(out))

    data = _field(obj, "data")
    if kind in VECTOR_KINDS:
        return MatrixDoc(kind, dims, data=_vector(data, n, "/data"))
    return MatrixDoc(kind, dims, data=_matrix(data, n, n, "/data"))


def loads(text: str) -> MatrixDoc:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    return parse(obj)


def load(path) -> MatrixDoc:
    return loads(Path(path).read_text())


# --- emission ----------------------------------------------------------------


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in m]
    return [encode_matrix(row) for row in m]


def to_json(doc: MatrixDoc) -> dict:
    if doc.kind in CHANNEL_KINDS:
        return {"kind": doc.kind, "d": doc.dims[0], "ops": [encode_matrix(m) for _, m in doc.elements]}
    out = {"kind": doc.kind, "dims": list(doc.dims)}
    if doc.kind in SET_KINDS:
        out["elements"] = [{"label": label, "data": encode_matrix(m)} for label, m in doc.elements]
    else:
        out["data"] = encode_matrix(doc.data)
    return out


def dumps(doc: MatrixDoc) -> str:
    return json.dumps(to_json(doc))


def dump(doc: MatrixDoc, path) -> None:
    Path(path).write_text(dumps(doc) + "\n")


# --- conversions to library objects -------------------------------------------


def doc_from_density(rho: states.DensityOperator) -> MatrixDoc:
    return MatrixDoc("density", tuple(rho.dims), data=rho.mat)


def doc_from_instrument(inst: measurements.Instrument) -> MatrixDoc:
    return MatrixDoc("instrument", (inst.dim,), elements=tuple((str(l), m) for l, m in zip(inst.labels, inst.detection_ops)))


def doc_from_povm(povm: measurements.POVM) -> MatrixDoc:
    return MatrixDoc("povm", (povm.dim,), elements=tuple((str(l), m) for l, m in zip(povm.labels, povm.elements)))


def doc_from_channel(ch: channels.KrausChannel) -> MatrixDoc:
    return MatrixDoc("kraus", (ch.dim,), elements=tuple((str(k), m) for k, m in enumerate(ch.kraus_ops)))


def to_density(doc: MatrixDoc) -> states.DensityOperator:
    if doc.kind == "state":
        return states.pure(doc.data, doc.dims)
    if doc.kind == "density":
        return states.assert_density(doc.data, doc.dims)
    raise SchemaError("/kind", f"expected a state or density document, got {doc.kind!r}")


def to_instrument(doc: MatrixDoc) -> measurements.Instrument:
    """Instruments load as given; POVMs get square-root detection operators."""
    labels = [label for label, _ in doc.elements]
    mats = [m for _, m in doc.elements]
    if doc.kind == "instrument":
        return measurements.assert_instrument(mats, labels)
    if doc.kind == "povm":
        return measurements.povm_to_detection(measurements.assert_povm(mats, labels))
    raise SchemaError("/kind", f"expected a povm or instrument document, got {doc.kind!r}")


def to_channel(doc: MatrixDoc):
    """Kraus documents give a validated :class:`KrausChannel`; superoperator
    documents give a :class:`LinearMap` (not necessarily CP)."""
    if doc.kind == "kraus":
        return channels.assert_channel([m for _, m in doc.elements])
    if doc.kind == "superop":
        return channels.LinearMap(doc.dims[0], superop=doc.elements[0][1])
    raise SchemaError("/kind", f"expected a kraus or superop document, got {doc.kind!r}")


def to_unitary(doc: MatrixDoc) -> np.ndarray:
    if doc.kind != "unitary":
        raise SchemaError("/kind", f"expected a unitary document, got {doc.kind!r}")
    return linalg.check_unitary(doc.data)
