# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # How single-qubit gate error grows with lattice size
#
# Every qubit runs a simultaneous X/2 gate.  Each victim sees all other
# lines attenuated by the linear dB distance law.  Eight frequencies are
# tiled so that near neighbours are always far detuned, which is why the
# error saturates instead of growing with qubit count.

# %%
import matplotlib.pyplot as plt

from xtalk_lab.crosstalk import LinearCrosstalkModel
from xtalk_lab.error_budget import (
    PROPAGATION_PHASE,
    ZERO_PHASE,
    ErrorScalingConfig,
    detuning_threshold,
    error_scaling_curve,
)

n_list = [5, 9, 13, 17, 21, 25, 29, 33]
models = {"(-2.0, -50)": LinearCrosstalkModel(-2.0, -50.0), "(-1.5, -45)": LinearCrosstalkModel(-1.5, -45.0)}

# %%
for name, model in models.items():
    for mode in (ZERO_PHASE, PROPAGATION_PHASE):
        curve = error_scaling_curve(ErrorScalingConfig(model=model, phase_mode=mode), n_list)
        plt.loglog([r.n_qubits for r in curve], [r.mean_error for r in curve], "o-", label=f"{name} {mode}")
plt.xlabel("qubits")
plt.ylabel("mean gate error")
plt.legend()

# %% [markdown]
# Zero phase has every line in step, the worst case.  Propagation phase
# adds a delay proportional to distance, so distant contributions partly
# cancel.
#
# How far must a strongly coupled neighbour (-27 dB) be detuned for a
# 20 ns pulse to leave an idle victim at 99.9 % or 99.99 %?

# %%
for target in (0.999, 0.9999):
    print(target, round(detuning_threshold(-27.0, 20.0, target), 2), "MHz")
