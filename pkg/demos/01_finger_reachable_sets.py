"""One finger, its reachable sets, and how fast they settle.

Run: python3 demos/01_finger_reachable_sets.py   (writes PNGs to demos/out/)
"""

# %%
import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zygofoot import FingerSpec, junction_positions, reachable_set, reachable_set_bruteforce, hausdorff_distance
from zygofoot.reach import attractor_approx, successive_gaps

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# %% A finger is a chain of phalanges shrinking by 1/rho each.
spec = FingerSpec(rho=1.2, omega=math.pi / 6, K=6)
fig, ax = plt.subplots(figsize=(5, 5))
for v in np.linspace(0, 1, 6):
    x = junction_positions(spec, [v] * spec.K)
    ax.plot(x.real, x.imag, "o-", ms=3, label=f"v = {v:.1f}")
ax.set_aspect("equal")
ax.legend(fontsize=7)
ax.set_title("uniform controls, rho = 1.2")
fig.savefig(OUT / "finger_poses.png", dpi=120)

# %% The tip after k phalanges sweeps out R_k.  The IFS route and plain
# enumeration of every control tuple agree to round-off.
spec = FingerSpec(rho=(1 + 5**0.5) / 2, omega=math.pi / 6, K=4)
for k in range(1, 6):
    a = reachable_set(spec, k, 4)
    b = reachable_set_bruteforce(spec, k, 4)
    print(f"k={k}: {len(a):5d} points, IFS vs enumeration d_H = {hausdorff_distance(a, b):.1e}")

# %% Successive iterates contract by 1/rho, which certifies distance to the attractor.
gaps = successive_gaps(spec, 3, depth=8)
print("gaps:", " ".join(f"{g:.3g}" for g in gaps))
approx = attractor_approx(spec, 2, tol=1e-3)
print(f"attractor: depth {approx.depth}, bound {approx.certified_bound:.2e}, converged={approx.converged}")

# %%
fig, axes = plt.subplots(1, 3, figsize=(12, 4))
for ax, k in zip(axes, (3, 6, approx.depth)):
    pts = reachable_set(spec, k, 2).points
    ax.plot(pts.real, pts.imag, ".", ms=1)
    ax.add_patch(plt.Circle((0, 0), spec.reach_bound, fill=False, ls="--", color="gray"))
    ax.set_aspect("equal")
    ax.set_title(f"R_{k}, two controls")
fig.savefig(OUT / "reachable_sets.png", dpi=120)
