# coding: utf-8

# # Arrays and training codebooks
#
# A node carries J sub-arrays of M half-wavelength elements.  In sin-space
# its response is a Kronecker product of two DFT tones, so every beam
# pattern can be read off an FFT.

# In[1]:

import numpy as np

from beamacq.arrays import ArrayGeometry, array_response, grid_phases
from beamacq.codebooks import beam_pattern_phases, build_codebook

ula = ArrayGeometry("ULA", 2, 16)
print(ula.size, "elements, sub-array spacing", round(ula.u / ula.wavelength, 2), "wavelengths")


# The response has unit entries, so |a|^2 is the element count.

# In[2]:

a = array_response(ula, np.deg2rad(20.0))
print(np.vdot(a, a).real)


# # Five codebooks with the same budget
#
# Every kind spends the same total power over its active antennas.  Wider
# beams cover more of sin-space per slot at the price of peak gain.

# In[3]:

rng = np.random.default_rng(0)
C = 128
for kind in ["full", "single-rf", "adaptive", "cross", "random"]:
    cb = build_codebook(kind, ula, 8, rng)
    pats = np.array([beam_pattern_phases(b, ula, C) ** 2 for b in cb.beams])
    best = pats.max(axis=0)
    print(f"{kind:10s} peak {10 * np.log10(best.max()):5.1f} dB   "
          f"worst direction {10 * np.log10(best.min() + 1e-30):6.1f} dB   "
          f"active antennas {sorted(set(cb.active_antennas.tolist()))}")


# With 8 beams the full codebook leaves deep holes between its pencil
# beams.  Adaptive sweeping turns on only 8 antennas, so its 8 beams tile
# the whole of sin-space.

# In[4]:

cb = build_codebook("adaptive", ula, 8)
cover = np.array([beam_pattern_phases(b, ula, C) ** 2 for b in cb.beams]).max(axis=0)
phases = grid_phases(ula, C)[:, 1]
print("adaptive coverage spread:", round(10 * np.log10(cover.max() / cover.min()), 2), "dB over",
      len(phases), "grid points")
