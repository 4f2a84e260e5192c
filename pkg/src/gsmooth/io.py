"""Complex file format and exporters.

The complex file is a single JSON document: patch control nets (row-major,
one out_dim-tuple per control point), interior edge records with their
reparameterizations, boundary edges, the smoothness order, and optionally
the geometry coefficients and named scalar fields.  Floats go through
Python's shortest exact decimal repr, so write-read round trips are
bit-exact; document key order is fixed, so identical data gives identical
bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .gluing import Reparameterization, SmoothnessReport
from .patches import EdgeId, TensorPatch
from .spaces import EdgeRecord, PatchComplex

FORMAT_NAME = "gsmooth-complex"
FORMAT_VERSION = 1


def complex_to_document(complex_: PatchComplex, k: int) -> dict:
    """JSON-ready dict for a complex with geometry set."""
    if complex_.geometry is None:
        raise FileFormatError("cannot serialize a complex without geometry")
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": complex_.n,
        "bidegree": list(complex_.bidegree),
        "k": int(k),
        "patches": [
            {"control_net": [[[float(c) for c in pt] for pt in row]
                             for row in patch.control_net]}
            for patch in complex_.geometry
        ],
        "edges": [
            {
                "patch_a": rec.patch_a,
                "edge_a": rec.edge_a.value,
                "patch_b": rec.patch_b,
                "edge_b": rec.edge_b.value,
                "shear_coeffs": [float(c) for c in rec.rho.shear_coeffs],
                "normal_scale": float(rec.rho.normal_scale),
            }
            for rec in complex_.edges
        ],
        "boundary_edges": [[pi, e.value] for pi, e in complex_.boundary_edges],
        "geometry_coeffs": (
            None if complex_.geometry_coeffs is None
            else [[float(c) for c in row] for row in complex_.geometry_coeffs]
        ),
        "fields": [
            {"name": name, "coeffs": [float(c) for c in coeffs]}
            for name, coeffs in complex_.fields.items()
        ],
    }
    return doc


def write_complex(path, complex_: PatchComplex, k: int) -> None:
    doc = complex_to_document(complex_, k)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def read_complex(path) -> tuple[PatchComplex, int]:
    """Load a complex file; returns (complex, smoothness order)."""
    path = Path(path)
    if not path.exists():
        raise FileFormatError(f"no such file: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"not valid JSON: {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise FileFormatError(f"not a {FORMAT_NAME} document: {path}")
    if doc.get("version") != FORMAT_VERSION:
        raise FileFormatError(
            f"unsupported version {doc.get('version')!r} (expected {FORMAT_VERSION})"
        )
    try:
        n = int(doc["n"])
        bidegree = tuple(int(x) for x in doc["bidegree"])
        k = int(doc["k"])
        patches = [
            TensorPatch(np.asarray(entry["control_net"], dtype=float))
            for entry in doc["patches"]
        ]
        edges = [
            EdgeRecord(
                int(e["patch_a"]),
                EdgeId(e["edge_a"]),
                int(e["patch_b"]),
                EdgeId(e["edge_b"]),
                Reparameterization(
                    EdgeId(e["edge_a"]),
                    EdgeId(e["edge_b"]),
                    np.asarray(e["shear_coeffs"], dtype=float),
                    float(e["normal_scale"]),
                ),
            )
            for e in doc["edges"]
        ]
        boundary = [(int(pi), EdgeId(v)) for pi, v in doc["boundary_edges"]]
        geometry_coeffs = doc.get("geometry_coeffs")
        fields = {
            entry["name"]: np.asarray(entry["coeffs"], dtype=float)
            for entry in doc.get("fields", [])
        }
    except (KeyError, ValueError, TypeError) as exc:
        raise FileFormatError(f"malformed complex file {path}: {exc}") from exc
    if len(patches) != n:
        raise FileFormatError(f"expected {n} patches, found {len(patches)}")
    complex_ = PatchComplex(
        n, bidegree, edges, boundary,
        geometry=patches,
        geometry_coeffs=(
            None if geometry_coeffs is None
            else np.asarray(geometry_coeffs, dtype=float)
        ),
        fields=fields,
    )
    return complex_, k


def report_to_csv(report: SmoothnessReport, path) -> None:
    """One row per sample plus a machine-parsable summary line."""
    lines = ["s,mismatch"]
    for s, m in zip(report.sample_params, report.per_sample_mismatch):
        lines.append(f"{float(s)!r},{float(m)!r}")
    verdict = "pass" if report.verdict else "fail"
    summary = (
        f"# summary k={report.k} max_mismatch={report.max_mismatch!r} "
        f"tol={report.tol!r} verdict={verdict}"
    )
    if report.min_jacobian_det is not None:
        summary += f" min_jacobian_det={report.min_jacobian_det!r}"
    if report.fd_ratio is not None:
        summary += f" fd_ratio={report.fd_ratio!r}"
    lines.append(summary)
    Path(path).write_text("\n".join(lines) + "\n")


def export_field_csv(path, geometry, fields, resolution: int) -> None:
    """Point cloud (x, y, value) of a per-patch scalar field, resolution^2
    grid samples per patch."""
    s = np.linspace(0.0, 1.0, resolution)
    lines = ["x,y,value"]
    for geo, f in zip(geometry, fields):
        xy = geo.eval_grid(s, s).reshape(-1, geo.out_dim)
        vals = f.eval_grid(s, s).reshape(-1)
        for pt, v in zip(xy, vals):
            coords = ",".join(repr(float(c)) for c in pt[:2])
            lines.append(f"{coords},{float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def export_surface_csv(path, geometry, resolution: int) -> None:
    """Point cloud of the geometry itself (x, y[, z])."""
    s = np.linspace(0.0, 1.0, resolution)
    d = geometry[0].out_dim
    lines = [",".join("xyz"[:d][i] for i in range(d))]
    for geo in geometry:
        pts = geo.eval_grid(s, s).reshape(-1, d)
        for pt in pts:
            lines.append(",".join(repr(float(c)) for c in pt))
    Path(path).write_text("\n".join(lines) + "\n")


def export_obj(path, geometry, resolution: int, heights=None) -> None:
    """Wavefront OBJ of the sampled patches as quad grids.

    d=3 patches export directly; planar patches get z=0, or the matching
    scalar field value as height when `heights` patches are given.
    """
    s = np.linspace(0.0, 1.0, resolution)
    lines = []
    faces = []
    offset = 0
    for pi, geo in enumerate(geometry):
        pts = geo.eval_grid(s, s)
        if geo.out_dim == 3:
            verts = pts.reshape(-1, 3)
        else:
            if heights is not None:
                z = heights[pi].eval_grid(s, s)[..., 0]
            else:
                z = np.zeros(pts.shape[:2])
            verts = np.concatenate([pts, z[..., None]], axis=-1).reshape(-1, 3)
        for v in verts:
            lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
        for i in range(resolution - 1):
            for j in range(resolution - 1):
                a = offset + i * resolution + j + 1
                b = a + resolution
                # counterclockwise in (u1, u2); orientation-preserving maps
                # keep the quads consistently oriented
                faces.append(f"f {a} {b} {b + 1} {a + 1}")
        offset += resolution * resolution
    Path(path).write_text("\n".join(lines + faces) + "\n")
