"""An owl strikes: talons spread in flight, the tendon lock closes on contact.

Run: python3 demos/04_tendon_lock.py
"""

# %%
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zygofoot import default_parrot_foot, simulate
from zygofoot.cli import list_scenarios, load_scenario
from zygofoot.tlm import Mode

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
foot = default_parrot_foot()

# %%
for name in list_scenarios():
    traj = simulate(foot, load_scenario(name))
    events = ", ".join(f"{e.kind}@{e.time:.3f}" for e in traj.events)
    print(f"{name:14s} {events}  guard violations: {len(traj.guard_violations)}")

# %% Talon paths relative to the (frozen) base during the strike.
traj = simulate(foot, load_scenario("strike_sphere"))
engaged = [s for s in traj.snapshots if s.mode is not Mode.FREE]
talons = np.array([s.talons() - s.base for s in engaged])
fig, ax = plt.subplots(figsize=(6, 4))
for h in range(4):
    ax.plot(talons[:, h, 0], talons[:, h, 2], label=f"toe {h + 1}")
    ax.plot(*talons[0, h, [0, 2]], "k.")
ax.set_aspect("equal")
ax.set_xlabel("x")
ax.set_ylabel("z")
ax.legend(fontsize=7)
ax.set_title("talons while the lock engages")
fig.savefig(OUT / "talon_paths.png", dpi=120)
