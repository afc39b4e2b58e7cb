"""JSON/CSV documents: schema validation, parsing and canonical output.

Floats are written with 17 significant digits so every value read back is
bit-identical to the one written; key order is fixed by construction and
no timestamps are emitted, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from .cluster import AdjacencyMatrix
from .errors import SchemaError, TopologyError
from .symplectic import CascadeTopology, FwmCell, Gain

SCHEMA_NAMES = ("topology", "graph", "solution", "report")


@lru_cache(maxsize=None)
def _registry() -> tuple[Registry, dict]:
    docs = {}
    for name in SCHEMA_NAMES:
        text = resources.files("fwmcluster").joinpath("schemas", f"{name}.v1.json").read_text()
        docs[name] = json.loads(text)
    registry = Registry().with_resources((d["$id"], Resource.from_contents(d)) for d in docs.values())
    return registry, docs


def schema(name: str) -> dict:
    return _registry()[1][name]


def _field_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def validate(doc, name: str) -> None:
    """Raise ``SchemaError`` carrying the path of the first offending field."""
    registry, docs = _registry()
    validator = Draft202012Validator(docs[name], registry=registry)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _field_path(err.absolute_path) or "<root>")


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON ({exc.msg} at line {exc.lineno})", str(path)) from None


def parse_topology(doc: dict) -> CascadeTopology:
    validate(doc, "topology")
    cells = tuple(FwmCell(Gain(c["gain"]), c["seed"]) for c in doc["cells"])
    try:
        return CascadeTopology(cells, tuple(doc.get("labels", ())))
    except TopologyError as exc:
        msg = str(exc)
        # messages from the cascade walk already carry a field path
        raise SchemaError(msg if msg.startswith("cells[") else f"labels: {msg}") from None


def topology_to_doc(t: CascadeTopology) -> dict:
    return {
        "schema_version": 1,
        "cells": [{"gain": c.gain.G, "seed": c.seed} for c in t.cells],
        "labels": list(t.labels),
    }


def parse_graph(doc: dict) -> AdjacencyMatrix:
    validate(doc, "graph")
    n = doc["n"]
    seen = set()
    for k, e in enumerate(doc["edges"]):
        i, j = e[0], e[1]
        if i > n or j > n:
            raise SchemaError(f"node index exceeds n={n}", f"edges[{k}]")
        if i == j:
            raise SchemaError("self-loops are not allowed", f"edges[{k}]")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise SchemaError(f"duplicate edge {list(key)}", f"edges[{k}]")
        seen.add(key)
    return AdjacencyMatrix.from_edges(n, doc["edges"])


def graph_to_doc(v: AdjacencyMatrix) -> dict:
    return {"schema_version": 1, "n": v.n, "edges": [[i, j, w] for i, j, w in v.edges()]}


def matrix(a) -> list:
    return [[float(x) for x in row] for row in np.asarray(a, dtype=float)]


def complex_matrix(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": matrix(a.real), "im": matrix(a.imag)}


def read_complex(d) -> np.ndarray:
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialise non-finite value {x!r}")
        text = f"{x:.17g}"
        # keep floats recognisable as floats on re-read
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in obj):
            return "[" + ", ".join(_encode(x, indent, level + 1) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(x, indent, level + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])
