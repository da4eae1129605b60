"""Spike and plateau patterns in the carcinogenesis shadow system.

Runs the four figure presets and prints, for each, where u concentrates and
what happens to xi.  Figures 1-3 start from data with isolated maxima and
grow spikes there; Figure 4 starts from data that are maximal on a whole
interval and settles towards a plateau.
"""

import numpy as np

from shadowsim.config import FIGURES
from shadowsim.grid import make_uniform_grid
from shadowsim.kinetics import Carcinogenesis, shadow_steady_states
from shadowsim.runner import reproduce_figure

model = Carcinogenesis(2.0, 1.0, 65.0 / 8.0)

for fid, preset in FIGURES.items():
    traj, report, _ = reproduce_figure(fid, write=False)
    u = traj.u[-1]
    peak = int(np.argmax(u))
    print(f"figure {fid}: u0 = {preset.u0}")
    print(f"  t = {traj.times[-1]:g}, status {report.status}, monitors clean: {report.monitor_clean}")
    print(f"  max u = {u.max():.3f} at x = {traj.grid.nodes[peak]:.4f}, min u = {u.min():.3e}, xi = {traj.xi[-1]:.4f}")

# the plateau the Figure-4 run is heading for: constant on [1/4, 3/4], zero outside
g = make_uniform_grid(512)
mask = (g.nodes >= 0.25) & (g.nodes <= 0.75)
for state in shadow_steady_states(model, g, mask):
    print(f"plateau state u = {state.u_bar:.4f}, xi = {state.xi_bar:.4f} ({state.classification})")
