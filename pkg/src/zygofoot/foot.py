"""Four planar fingers assembled into a 3D zygodactyl foot.

Each finger lives in a vertical plane through the origin.  A planar point
``x + iz`` is embedded as ``(x cos W, x sin W, z)`` where W is the angle the
finger plane makes with the xz-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .finger import GOLDEN, ControlSet, FingerSpec, junction_positions
from .reach import DEFAULT_BUDGET, PointCloud2, reachable_set


@dataclass(frozen=True)
class PointCloud3:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite values")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class FootSpec:
    fingers: tuple[FingerSpec, FingerSpec, FingerSpec, FingerSpec]
    plane_angles: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.fingers) != 4 or len(self.plane_angles) != 4:
            raise ValueError("a foot has exactly four fingers and four plane angles")
        for w in self.plane_angles:
            if not abs(w) < math.pi / 2:
                raise ValueError(f"plane angles must satisfy |W| < pi/2, got {w!r}")
        object.__setattr__(self, "fingers", tuple(self.fingers))
        object.__setattr__(self, "plane_angles", tuple(float(w) for w in self.plane_angles))

    def finger(self, i: int) -> FingerSpec:
        """Finger by its 1-based label."""
        return self.fingers[_index(i)]

    def plane_angle(self, i: int) -> float:
        return self.plane_angles[_index(i)]


def _index(i: int) -> int:
    if int(i) != i or not 1 <= i <= 4:
        raise ValueError(f"finger index must be in 1..4, got {i!r}")
    return int(i) - 1


def default_parrot_foot(rho: float = GOLDEN, omega: float = math.pi / 6,
                        control_set: ControlSet | None = None,
                        phalanx_counts: Sequence[int] = (2, 3, 4, 5)) -> FootSpec:
    """The parrot foot: fingers 1, 3 point forward and 2, 4 backward.

    Fingers 1 and 2 share the plane at +pi/12, fingers 3 and 4 the plane at
    -pi/12.  Backward fingers start at angle pi with mirrored rotation sense.
    """
    cs = control_set if control_set is not None else ControlSet.interval(8)
    fingers = []
    for i, K in enumerate(phalanx_counts, start=1):
        forward = i in (1, 3)
        fingers.append(FingerSpec(rho=rho, omega=omega, theta0=0.0 if forward else math.pi,
                                  chirality=1 if forward else -1, K=int(K), control_set=cs))
    w = math.pi / 12
    return FootSpec(tuple(fingers), (w, w, -w, -w))


def embed_finger(cloud, plane_angle: float) -> PointCloud3:
    """Map planar points ``x + iz`` into 3D and rotate by ``plane_angle`` about z."""
    pts = cloud.points if isinstance(cloud, PointCloud2) else np.atleast_1d(np.asarray(cloud, dtype=complex))
    c, s = math.cos(plane_angle), math.sin(plane_angle)
    return PointCloud3(np.column_stack([pts.real * c, pts.real * s, pts.imag]))


def foot_reachable(foot: FootSpec, finger_index: int, k: int, resolution=None,
                   budget: int = DEFAULT_BUDGET) -> PointCloud3:
    spec = foot.finger(finger_index)
    if k > spec.K:
        raise ValueError(f"depth {k} exceeds finger {finger_index}'s phalanx count {spec.K}")
    return embed_finger(reachable_set(spec, k, resolution, budget=budget), foot.plane_angle(finger_index))


def foot_pose(foot: FootSpec, seqs: Sequence[Sequence[float]]) -> list[np.ndarray]:
    """3D junctions of all four fingers, one (K_i + 1, 3) array each."""
    if len(seqs) != 4:
        raise ValueError("foot_pose needs one control sequence per finger")
    return [embed_finger(junction_positions(f, s), w).points
            for f, s, w in zip(foot.fingers, seqs, foot.plane_angles)]
