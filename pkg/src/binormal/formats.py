"""File formats: polytope JSON, ASCII OFF meshes, and inventory JSON.

The polytope JSON format is a flat object::

    {"dim": 2, "vertices": [[x, y], ...], "name": "optional"}

Geometry is vertex-driven everywhere (every construction emits vertex
sets), so files carry vertices only and facet/face data is recomputed on
load.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .geometry import Chord, InputError, IsolatedNormal, NormalFamily, NormalInventory
from .polytope import Polytope, build_hull


def polytope_to_dict(p: Polytope) -> dict:
    out = {"dim": p.dim, "vertices": p.vertices.tolist()}
    if p.name:
        out["name"] = p.name
    return out


def polytope_from_dict(obj: dict, tol: float | None = None) -> Polytope:
    try:
        dim = int(obj["dim"])
        vertices = np.asarray(obj["vertices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad polytope object: {exc}") from exc
    if vertices.ndim != 2 or vertices.shape[1] != dim:
        raise InputError("vertex array does not match the declared dimension")
    kwargs = {} if tol is None else {"tol": tol}
    return build_hull(vertices, name=obj.get("name"), **kwargs)


def save_polytope_json(p: Polytope, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(polytope_to_dict(p), fh, indent=1)
        fh.write("\n")


def load_polytope_json(path: str, tol: float | None = None) -> Polytope:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read polytope JSON {path}: {exc}") from exc
    return polytope_from_dict(obj, tol)


def _ordered_facet_loop(p: Polytope, facet) -> list[int]:
    """Order a 3-d facet's vertices counterclockwise around its centroid."""
    ids = sorted(facet.vertex_ids)
    pts = p.vertices[ids]
    centroid = pts.mean(axis=0)
    _, _, vh = np.linalg.svd(facet.normal[None, :])
    e1, e2 = vh[1], vh[2]
    ang = np.arctan2((pts - centroid) @ e2, (pts - centroid) @ e1)
    ordered = [ids[k] for k in np.argsort(ang)]
    # make the loop orientation agree with the outward normal
    a, b, c = (p.vertices[ordered[k]] for k in range(3))
    if np.dot(np.cross(b - a, c - a), facet.normal) < 0:
        ordered.reverse()
    return ordered


def save_off(p: Polytope, path: str) -> None:
    """Write an ASCII OFF mesh; 3-d polytopes only."""
    if p.dim != 3:
        raise InputError(f"OFF export needs a 3-d polytope, got dimension {p.dim}")
    lines = ["OFF", f"{p.n_vertices} {len(p.facets)} 0"]
    for v in p.vertices:
        lines.append(" ".join(f"{x:.17g}" for x in v))
    for f in p.facets:
        loop = _ordered_facet_loop(p, f)
        lines.append(" ".join([str(len(loop))] + [str(i) for i in loop]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_off(path: str, tol: float | None = None) -> Polytope:
    """Read an ASCII OFF file; the polytope is rebuilt as the vertex hull."""
    try:
        with open(path) as fh:
            tokens = []
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    tokens.extend(line.split())
    except OSError as exc:
        raise InputError(f"cannot read OFF file {path}: {exc}") from exc
    if not tokens or tokens[0] != "OFF":
        raise InputError(f"{path} is not an ASCII OFF file")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        coords = [float(t) for t in tokens[4:4 + 3 * nv]]
    except (IndexError, ValueError) as exc:
        raise InputError(f"malformed OFF header in {path}: {exc}") from exc
    if len(coords) != 3 * nv:
        raise InputError(f"OFF file {path} truncated")
    vertices = np.array(coords, dtype=float).reshape(nv, 3)
    kwargs = {} if tol is None else {"tol": tol}
    return build_hull(vertices, name=path, **kwargs)


def load_geometry(path: str, tol: float | None = None) -> Polytope:
    if path.endswith(".off"):
        return load_off(path, tol)
    return load_polytope_json(path, tol)


def save_geometry(p: Polytope, path: str, fmt: str | None = None) -> None:
    fmt = fmt or ("off" if path.endswith(".off") else "json")
    if fmt == "off":
        save_off(p, path)
    elif fmt == "json":
        save_polytope_json(p, path)
    else:
        raise InputError(f"unknown geometry format {fmt!r}")


# --------------------------------------------------------------------------
# inventory serialization
# --------------------------------------------------------------------------

def _chord_to_dict(c: Chord) -> dict:
    return {"tail": c.tail.tolist(), "head": c.head.tolist(),
            "length": c.length()}


def _chord_from_dict(obj: dict) -> Chord:
    return Chord(obj["tail"], obj["head"])


def inventory_to_dict(inv: NormalInventory) -> dict:
    return {
        "dim": inv.dim,
        "nonoriented_count": inv.nonoriented_count,
        "isolated": [
            {
                **_chord_to_dict(r.chord),
                "tail_face": sorted(r.tail_face) if r.tail_face is not None else None,
                "head_face": sorted(r.head_face) if r.head_face is not None else None,
                "residual": r.residual,
            }
            for r in inv.isolated
        ],
        "families": [
            {
                "representative": _chord_to_dict(f.representative),
                "dimension": f.dimension,
                "length": f.length,
                "member_count": f.member_count,
                "tail_face": sorted(f.tail_face) if f.tail_face is not None else None,
                "head_face": sorted(f.head_face) if f.head_face is not None else None,
            }
            for f in inv.families
        ],
        "meta": _json_safe(inv.meta),
    }


def inventory_from_dict(obj: dict) -> NormalInventory:
    try:
        isolated = [
            IsolatedNormal(
                _chord_from_dict(r),
                frozenset(r["tail_face"]) if r.get("tail_face") is not None else None,
                frozenset(r["head_face"]) if r.get("head_face") is not None else None,
                r.get("residual", 0.0),
            )
            for r in obj["isolated"]
        ]
        families = [
            NormalFamily(
                _chord_from_dict(f["representative"]),
                int(f["dimension"]),
                frozenset(f["tail_face"]) if f.get("tail_face") is not None else None,
                frozenset(f["head_face"]) if f.get("head_face") is not None else None,
                f.get("member_count"),
            )
            for f in obj["families"]
        ]
        return NormalInventory(isolated=isolated, families=families,
                               dim=int(obj["dim"]), meta=obj.get("meta", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad inventory object: {exc}") from exc


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, frozenset):
        return sorted(obj)
    return obj
