# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # xy crosstalk on a small lattice
#
# A 3x3 lattice with the default distance law.  We drive a far qubit's line,
# watch the centre qubit Rabi-oscillate slowly, and read the crosstalk back
# from the ratio of Rabi slopes.

# %%
import numpy as np
import matplotlib.pyplot as plt

from xtalk_lab.lattice import build_lattice
from xtalk_lab.virtual_lab import measure_xy_crosstalk, synth_rabi_trace
from xtalk_lab.crosstalk import db_to_amplitude_ratio

dev = build_lattice(3)
victim, source = dev.center_index(), 0
dev.xy_crosstalk_db(victim, source)

# %% [markdown]
# One trace at 20 V on the source line.  The victim only sees a fraction
# `10**(lambda/20)` of the drive.

# %%
trace = synth_rabi_trace(dev, victim, source, 20.0, noise_sigma=0.02, seed=1)
plt.plot(trace.times, trace.excited_population, lw=0.8)
plt.xlabel("time (ns)")
plt.ylabel("P(1)")

# %%
res = measure_xy_crosstalk(dev, victim, source, noise_sigma=0.02, seed=1)
print(f"injected {dev.xy_crosstalk_db(victim, source):.3f} dB, measured {res.lambda_db:.3f} +- {res.lambda_err_db:.3f} dB")

# %% [markdown]
# The dB numbers are amplitude ratios, so -27 dB is about 4.5 % and -56 dB
# about 0.16 % of the drive.

# %%
for lam in (-27.0, -40.0, -56.0):
    print(lam, f"{100 * db_to_amplitude_ratio(lam):.3f} %")
