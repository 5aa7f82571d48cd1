# %% [markdown]
# # Linear spectrum and the exceptional point
#
# With the nonlinearity switched off the map is affine, and its homogeneous
# part is a 2x2 transfer matrix. Its eigenvalues form a conjugate pair of
# modulus 1/sqrt(2) until cosh(gamma) reaches sqrt(2), where they coalesce
# and split into two real values.

# %%
import matplotlib.pyplot as plt
import numpy as np

from ptikeda import eigenspectrum_sweep, exceptional_point, linear_instability_threshold

print("exceptional point:", exceptional_point())
print("spectral radius reaches 1 at:", linear_instability_threshold())

# %%
sweep = eigenspectrum_sweep(0.0, 1.5, 301)
g = np.array([r.gamma for r in sweep])
l1 = np.array([r.lambda1 for r in sweep])
l2 = np.array([r.lambda2 for r in sweep])

fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(9, 3.5))
ax_re.plot(g, l1.real, g, l2.real)
ax_im.plot(g, l1.imag, g, l2.imag)
for ax, name in ((ax_re, "Re"), (ax_im, "Im")):
    ax.axvline(exceptional_point(), color="k")
    ax.set_xlabel("gamma")
    ax.set_ylabel(f"{name} lambda")
fig.tight_layout()
fig.savefig("linear_spectrum.png", dpi=120)
