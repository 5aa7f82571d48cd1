# %% [markdown]
# # Parameter basin over gain/loss and drive amplitude
#
# Both inputs carry the same real amplitude. Cells are labelled P1/P2/P4/P8
# by the period of the steady-state P4 series, and otherwise by the sign of
# the Lyapunov exponent. `workers` spreads rows over processes.

# %%
import matplotlib.pyplot as plt
import numpy as np

from ptikeda import OrbitSpec, parameter_basin

grid = parameter_basin((0.6, 1.1), (0.3, 0.9), 60, 60, OrbitSpec(), workers=1)
order = ["P1", "P2", "P4", "P8", "quasiperiodic", "chaotic", "diverged"]
codes = np.vectorize(order.index)(grid.labels)

# %%
fig, ax = plt.subplots(figsize=(6, 5))
im = ax.pcolormesh(grid.gammas, grid.e_ins, codes.T, cmap="tab10", vmin=0, vmax=9, shading="nearest")
ax.set_xlabel("gamma")
ax.set_ylabel("E_in")
for k, name in enumerate(order):
    print(f"{name:>14}: {(codes == k).sum()}")
fig.savefig("basin.png", dpi=120)
