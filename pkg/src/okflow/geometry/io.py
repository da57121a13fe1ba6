"""Parse and serialize the curve JSON schema.

``{"ambient": "r2"|"t2", "components": [{"orientation": "ccw"|"cw", "vertices": [[x, y], ...]}, ...]}``
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .curve import Ambient, GeometryError, MultiCurve, PlaneCurve


def to_dict(shape: MultiCurve) -> dict:
    return {
        "ambient": shape.ambient.value,
        "components": [
            {"orientation": c.orientation, "vertices": c.vertices.tolist()} for c in shape.components
        ],
    }


def from_dict(data: dict) -> MultiCurve:
    try:
        ambient = Ambient(data["ambient"])
        comps = data["components"]
    except (KeyError, ValueError, TypeError) as exc:
        raise GeometryError(f"malformed curve document: {exc}") from exc
    curves = []
    for c in comps:
        if "vertices" not in c:
            raise GeometryError("every component needs a 'vertices' list")
        curves.append(PlaneCurve(np.asarray(c["vertices"], float), ambient, c.get("orientation")))
    shape = MultiCurve(tuple(curves))
    if shape.topology == "annulus":
        outer = 0 if curves[0].orientation == "ccw" else 1
        shape = MultiCurve(shape.components, outer=outer)
    return shape


def dumps(shape: MultiCurve) -> str:
    """Serialize with full double precision (``repr`` round-trips exactly)."""
    return json.dumps(to_dict(shape), separators=(",", ":"))


def loads(text: str) -> MultiCurve:
    return from_dict(json.loads(text))


def fingerprint(shape: MultiCurve) -> str:
    """Short sha256 digest of the ambient and the exact vertex bytes."""
    h = hashlib.sha256(shape.ambient.value.encode())
    for c in shape.components:
        h.update(np.ascontiguousarray(c.vertices, dtype="<f8").tobytes())
    return h.hexdigest()[:16]
