"""Readers and writers for clouds, perch reports and TLM trajectories.

All formats are plain text with LF line endings.  Floats are written with
17 significant digits so every file round-trips bit-exactly.
"""

from __future__ import annotations

import json
import math
import re
from importlib import resources
from pathlib import Path
from typing import Iterable

import jsonschema
import numpy as np

from .foot import PointCloud3
from .perch import BranchSolution
from .tlm import Event, Trajectory

CLOUD_FORMATS = ("csv", "ply", "svg", "json")

_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(token: str) -> float:
    """Parse ``pi/6``, ``-2pi/3``, ``3*pi/4``, ``pi`` or plain radians."""
    m = _ANGLE.match(str(token))
    if m:
        sign, num, den = m.groups()
        val = (float(num) if num else 1.0) * math.pi / (float(den) if den else 1.0)
        return -val if sign == "-" else val
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"cannot parse angle {token!r}") from None


def _g(x: float) -> str:
    s = f"{float(x):.17g}"
    return "0" if s == "-0" else s


def _as3(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud3):
        return cloud.points
    pts = np.asarray(getattr(cloud, "points", cloud))
    if np.iscomplexobj(pts) or pts.ndim == 1:
        pts = np.atleast_1d(pts).astype(complex)
        return np.column_stack([pts.real, np.zeros(pts.size), pts.imag])
    return np.asarray(pts, float).reshape(-1, 3)


# ---------------------------------------------------------------------------
# clouds
# ---------------------------------------------------------------------------

def cloud_to_csv(cloud) -> str:
    rows = ["x,y,z"] + [",".join(_g(v) for v in p) for p in _as3(cloud)]
    return "\n".join(rows) + "\n"


def cloud_to_ply(cloud) -> str:
    pts = _as3(cloud)
    head = ["ply", "format ascii 1.0", f"element vertex {len(pts)}",
            "property double x", "property double y", "property double z", "end_header"]
    return "\n".join(head + [" ".join(_g(v) for v in p) for p in pts]) + "\n"


def cloud_to_json(cloud, meta: dict | None = None) -> str:
    payload = {"meta": meta or {}, "points": [[float(v) for v in p] for p in _as3(cloud)]}
    return json.dumps(payload, sort_keys=True) + "\n"


def _svg(polylines: Iterable[np.ndarray], dots: np.ndarray | None, scale_radius: float | None,
         extent: float, title: str) -> str:
    size = 400.0
    k = size / (2.0 * extent)

    def xy(x, z):
        return f"{(x + extent) * k:.6f},{(extent - z) * k:.6f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
           f'viewBox="0 0 {size:.0f} {size:.0f}">', f"<title>{title}</title>",
           f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>']
    if scale_radius is not None:
        cx, cy = xy(0.0, 0.0).split(",")
        out.append(f'<circle cx="{cx}" cy="{cy}" r="{scale_radius * k:.6f}" fill="none" '
                   f'stroke="#999" stroke-dasharray="4 3"/>')
    for line in polylines:
        pts = " ".join(xy(x, z) for x, z in line)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#c33" stroke-width="1.5"/>')
    if dots is not None:
        for x, z in dots:
            cx, cy = xy(x, z).split(",")
            out.append(f'<circle cx="{cx}" cy="{cy}" r="1" fill="#135"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cloud_to_svg(cloud, reach_bound: float | None = None, title: str = "reachable set") -> str:
    """xz-projection of a cloud, with the reach circle drawn for scale."""
    pts = _as3(cloud)
    extent = 1.1 * max(reach_bound or 0.0, float(np.abs(pts[:, [0, 2]]).max(initial=0.0)), 1e-9)
    return _svg([], pts[:, [0, 2]], reach_bound, extent, title)


def write_cloud(cloud, path, fmt: str, **kw) -> None:
    text = {"csv": cloud_to_csv, "ply": cloud_to_ply, "json": cloud_to_json, "svg": cloud_to_svg}[fmt](cloud, **kw)
    _write_text(path, text)


def _write_text(path, text: str) -> None:
    if str(path) == "-":
        import sys
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def read_cloud(path) -> PointCloud3:
    """Read a csv/ply/json cloud written by this module (format from the suffix)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower().lstrip(".")
    try:
        if suffix == "json":
            pts = json.loads(text)["points"]
        elif suffix == "ply":
            lines = text.splitlines()
            if not lines or lines[0].strip() != "ply":
                raise ValueError("not a PLY file")
            end = lines.index("end_header")
            n = next(int(l.split()[2]) for l in lines[:end] if l.startswith("element vertex"))
            pts = [[float(v) for v in l.split()] for l in lines[end + 1:end + 1 + n]]
        elif suffix == "csv":
            lines = text.splitlines()
            if not lines or lines[0].strip() != "x,y,z":
                raise ValueError("CSV header must be exactly x,y,z")
            pts = [[float(v) for v in l.split(",")] for l in lines[1:] if l.strip()]
        else:
            raise ValueError(f"unsupported cloud format {suffix!r}")
        arr = np.asarray(pts, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise ValueError("cloud must be a non-empty list of 3D points")
    except (KeyError, IndexError, StopIteration, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed cloud file {path}: {exc}") from None
    return PointCloud3(arr)


# ---------------------------------------------------------------------------
# perch reports
# ---------------------------------------------------------------------------

def load_schema(name: str) -> dict:
    return json.loads(resources.files("zygofoot").joinpath("schemas", name).read_text(encoding="utf-8"))


def solution_record(s: BranchSolution) -> dict:
    return {
        "controls": {"fwd": [float(v) for v in s.controls_fwd], "bwd": [float(v) for v in s.controls_bwd]},
        "k": {"fwd": int(s.k_fwd), "bwd": int(s.k_bwd)},
        "t": {"fwd": float(s.tangency_fwd.t), "bwd": float(s.tangency_bwd.t)},
        "theta": {"fwd": float(s.tangency_fwd.theta), "bwd": float(s.tangency_bwd.theta)},
        "residual": float(s.residual_norm),
        "r": float(s.r),
        "c_z": float(s.c_z),
        "converged": bool(s.converged),
        "singular": bool(s.singular),
        "stable": bool(s.stable),
        "grasping": bool(s.grasping),
    }


def perch_report(mode: str, solutions: list[BranchSolution], params: dict) -> dict:
    report = {
        "mode": mode,
        "params": params,
        "converged": bool(solutions) and bool(solutions[0].converged),
        "solutions": [solution_record(s) for s in solutions],
    }
    jsonschema.validate(report, load_schema("perch_report.schema.json"))
    return report


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

def trajectory_to_csv(traj: Trajectory) -> str:
    cols = ["time", "mode"] + [f"toe{h}_{c}" for h in range(1, 5) for c in "xyz"]
    rows = [",".join(cols)]
    for s in traj.snapshots:
        rows.append(",".join([_g(s.time), s.mode.value] + [_g(v) for v in s.talons().ravel()]))
    return "\n".join(rows) + "\n"


def events_to_json(events: Iterable[Event]) -> str:
    return dump_json([{"kind": e.kind, "step": e.step, "time": e.time, "detail": e.detail} for e in events])


def trajectory_to_svg(traj: Trajectory) -> str:
    talons = np.array([s.talons() for s in traj.snapshots])  # (steps, 4, 3)
    lines = [talons[:, h][:, [0, 2]] for h in range(4)]
    extent = 1.1 * max(float(np.abs(talons[:, :, [0, 2]]).max(initial=0.0)), 1e-9)
    return _svg(lines, None, None, extent, "talon trajectories")


def read_trajectory_csv(path) -> tuple[list[str], np.ndarray, list[str]]:
    """Return (columns, numeric matrix without the mode column, modes)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    cols = lines[0].split(",")
    modes, rows = [], []
    for l in lines[1:]:
        parts = l.split(",")
        modes.append(parts[1])
        rows.append([float(parts[0])] + [float(v) for v in parts[2:]])
    return cols, np.asarray(rows), modes
