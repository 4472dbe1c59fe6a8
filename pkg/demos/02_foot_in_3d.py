"""The parrot foot: four fingers in two tilted planes.

Run: python3 demos/02_foot_in_3d.py
"""

# %%
import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zygofoot import default_parrot_foot, foot_pose, foot_reachable
from zygofoot import io

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

foot = default_parrot_foot()
for i, (f, w) in enumerate(zip(foot.fingers, foot.plane_angles), start=1):
    side = "forward" if f.chirality > 0 else "backward"
    print(f"finger {i}: K={f.K}, plane {math.degrees(w):+.0f} deg, {side}")

# %% Open and curled poses.
fig = plt.figure(figsize=(10, 5))
for n, v in enumerate((0.0, 1.0), start=1):
    ax = fig.add_subplot(1, 2, n, projection="3d")
    for p in foot_pose(foot, [[v] * f.K for f in foot.fingers]):
        ax.plot(p[:, 0], p[:, 1], p[:, 2], "o-", ms=3)
    ax.set_title(f"all controls {v:g}")
    ax.set_zlim(-1.2, 0.3)
fig.savefig(OUT / "foot_poses.png", dpi=120)

# %% Reachable set of the third finger's tip, embedded in 3D, for two omegas.
fig = plt.figure(figsize=(10, 5))
for n, omega in enumerate((math.pi / 12, math.pi / 6), start=1):
    cloud = foot_reachable(default_parrot_foot(omega=omega), 3, 4, 8)
    r = np.linalg.norm(cloud.points, axis=1)
    print(f"omega={omega:.3f}: {len(cloud)} points, max |x| = {r.max():.4f} (bound {foot.finger(3).reach_bound:.4f})")
    ax = fig.add_subplot(1, 2, n, projection="3d")
    ax.scatter(*cloud.points.T, s=1)
    ax.set_title(f"R^3_4, omega = {omega:.3f}")
    io.write_cloud(cloud, OUT / f"finger3_omega{n}.ply", "ply")
fig.savefig(OUT / "foot_reachable.png", dpi=120)
