# coding: utf-8

# # How long to train, how long to transmit
#
# A path survives an exponential time with rate delta.  Longer training
# gives a better beam but leaves less of the path's lifetime for data.
# Longer frames amortise training but risk a blocked path.

# In[1]:

import numpy as np

from beamacq.overhead import (expected_data_time, optimal_bandwidth, optimal_frame_length,
                              optimize_from_cdfs, SinrCdf, training_ladder)

print("pilot bandwidth for 4 us switching:", optimal_bandwidth(4e-6) / 1e3, "kHz")


# The best frame length shrinks as blocking becomes more frequent.

# In[2]:

for delta in [0.5, 2.0, 10.0, 50.0]:
    T = optimal_frame_length(delta, 1e-3, 0.1)
    print(f"delta {delta:5.1f}/s: frame {1e3 * T:6.1f} ms, useful fraction "
          f"{expected_data_time(delta, 1e-3, T) / T:.3f}")


# With a SINR distribution per training length, the optimiser scans the
# ladder and picks the best training budget.  A toy distribution whose
# mean saturates with the beam count stands in for simulation output.

# In[3]:

rng = np.random.default_rng(0)
ladder = training_ladder(range(2, 33, 2), 4e-6, 32, 32, T_max=0.1)
cdfs = [SinrCdf(rng.exponential(300 * (1 - np.exp(-p.n / 6)), 2000)) for p in ladder]
for delta in [0.5, 5.0, 20.0]:
    pt, fp, val = optimize_from_cdfs(ladder, cdfs, delta, 0.1).optimum
    print(f"delta {delta:4.1f}/s: {pt.n} beams per side, overhead {100 * fp.overhead_ratio:.2f}%")
