# %% [markdown]
# # Extreme events and sign structure of Im(E4)
#
# Long records (10^6 round trips) are needed for rare-event statistics.
# Events are samples above mean + 8 std of the P4 series.

# %%
import matplotlib.pyplot as plt

from ptikeda import (
    MapParams,
    OrbitSpec,
    crisis_report,
    ee_report,
    iterate_orbit,
    probability_histogram,
    state_plane_dump,
)

params = MapParams(gamma=0.96)
orbit = iterate_orbit(params, OrbitSpec(1500, 1_000_000))
report = ee_report(orbit.p4, multiplier=8)
hist = probability_histogram(orbit.p4, 200)
print(report.mean, report.std, report.threshold, report.n_events, report.max_value)

# %%
fig, (ax_t, ax_h) = plt.subplots(1, 2, figsize=(10, 3.5))
ax_t.plot(orbit.p4[:5000], lw=0.5)
ax_t.axhline(report.threshold, color="r")
ax_h.bar(hist.centers, hist.probs, width=hist.edges[1] - hist.edges[0])
ax_h.set_yscale("log")
fig.savefig("extreme_events.png", dpi=120)

# %% [markdown]
# Attracting sets on either side of Im(E4) = 0, and whether the orbit
# switches between them.

# %%
fig, axes = plt.subplots(1, 4, figsize=(14, 3), sharey=True)
for ax, g in zip(axes, (0.93, 0.945, 0.95, 0.96)):
    o = iterate_orbit(params.with_(gamma=g), OrbitSpec(1500, 100_000))
    print(g, crisis_report(o))
    plane = state_plane_dump(o)
    ax.plot(plane[:3000, 1], ",")
    ax.set_title(f"gamma={g}")
fig.savefig("crisis.png", dpi=120)
