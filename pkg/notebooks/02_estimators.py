# coding: utf-8

# # Angle estimation from swept beams
#
# One mobile, one AP, one path.  We run downlink training and compare max
# power (MP), local ML (AoA only) and joint ML (AoA and AoD).

# In[1]:

import numpy as np

from beamacq.arrays import ArrayGeometry, grid_phases
from beamacq.channel import Channel, PathComponent
from beamacq.codebooks import build_codebook
from beamacq.estimators import estimate_lml, estimate_ml, estimate_mp, ml_statistic, ml_statistic_direct
from beamacq.signaling import Network, TrainingConfig, downlink_observations

ula = ArrayGeometry("ULA", 2, 16)
rng = np.random.default_rng(1)
aoa, aod = np.deg2rad(17.0), np.deg2rad(-31.0)
ch = Channel.for_arrays([PathComponent(0.02 * np.exp(0.4j), aoa, aod)], ula, ula, "A", "m")
net = Network({"A": ula}, {"m": ula}, {("A", "m"): ch})
cb = build_codebook("adaptive", ula, 8)
cfg = TrainingConfig(8, 8, 1, 1.0, 1.0, 1e-3, {"A": cb}, {"m": cb})
Y = downlink_observations(net, cfg, rng)["m"].values


# The FFT statistic is exact: it agrees with a direct evaluation at every
# grid point.

# In[2]:

F = cfg.pilot_beams("A")
fast = ml_statistic(Y, ula, F, ula, cb, 64).values
slow = ml_statistic_direct(Y, ula, F, ula, cb, 64)
print("max relative gap:", np.max(np.abs(fast - slow)[slow > 0] / slow[slow > 0]))


# MP can only point where a beam points.  The ML grid is finer.

# In[3]:

def wrap(x):
    return np.angle(np.exp(1j * np.asarray(x)))


true = ula.phases(aoa)[1], ula.phases(aod)[1]
ml = estimate_ml(Y, ula, F, ula, cb, 64)
lml = estimate_lml(Y, ula, cb, 64)
i, j = estimate_mp(Y)
print("true  AoA/AoD phases", np.round(wrap(true), 3))
print("ML    ", np.round(wrap([ml.aoa_phase[1], ml.aod_phase[1]]), 3))
print("LML   ", np.round(wrap(lml.aoa_phase[1]), 3))
print("MP    ", np.round(wrap([cb.pointing[i][1], cb.pointing[j][1]]), 3))
print("grid step", round(2 * np.pi / 64, 3))
