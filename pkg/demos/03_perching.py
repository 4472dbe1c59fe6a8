"""Laying two opposable fingers on a branch.

A forward finger (K=4) and a backward finger (K=2) share the plane at pi/12;
all controls are 1.  We look for cylinders tangent to one phalanx of each.

Run: python3 demos/03_perching.py
"""

# %%
import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zygofoot import FingerSpec, CylinderBranch, junction_positions, search_grasp, solve_branch_indices
from zygofoot.perch import EllipseSection, ellipse_point

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
W = math.pi / 12
fwd = FingerSpec(omega=math.pi / 6, K=4)
bwd = fwd.mirrored().with_K(2)

# %% Free-centre branches, one search per phalanx pair.
for mode in ("paper", "geometric"):
    print(f"-- ellipse mode {mode}")
    for s in solve_branch_indices(fwd, [1] * 4, bwd, [1] * 2, W, mode):
        if s.converged:
            print(f"  k=({s.k_fwd},{s.k_bwd})  r={s.r:.4f}  c_z={s.c_z:.4f}  grasping={s.grasping}")

# %% Branch top pinned to the foot base (c_z = -r).
pinned = [s for s in solve_branch_indices(fwd, [1] * 4, bwd, [1] * 2, W, "paper", touch_origin=True)
          if s.converged]
for s in pinned:
    print(f"pinned: k=({s.k_fwd},{s.k_bwd})  r={s.r:.4f}  t=({s.tangency_fwd.t:.3f}, {s.tangency_bwd.t:.3f})")

# %% Picture of every converged solution.
sols = [s for s in solve_branch_indices(fwd, [1] * 4, bwd, [1] * 2, W, "paper") if s.converged] + pinned
fig, ax = plt.subplots(figsize=(6, 6))
for spec, seq in ((fwd, [1] * 4), (bwd, [1] * 2)):
    x = junction_positions(spec, seq)
    ax.plot(x.real, x.imag, "ko-", lw=2)
th = np.linspace(0, 2 * math.pi, 200)
for s in sols:
    e = EllipseSection.from_branch(s.cylinder, W, "paper")
    g = ellipse_point(e, th)
    ax.plot(g.real, g.imag, lw=1, label=f"k=({s.k_fwd},{s.k_bwd}) r={s.r:.3f}")
ax.set_aspect("equal")
ax.legend(fontsize=7)
fig.savefig(OUT / "perch_solutions.png", dpi=120)

# %% Fixed branch, every control pair on a two-value grid.
branch = CylinderBranch(0.5 * math.cos(math.pi / 6), 0.0, -0.5)
hits = search_grasp(fwd, bwd, branch, 0.0, resolution=2)
print(f"{len(hits)} tangent control pairs, {sum(h.grasping for h in hits)} grasping")
print("huge branch below the foot:", len(search_grasp(fwd, bwd, CylinderBranch(100.0, 0.0, -100.5), W, 2)))
