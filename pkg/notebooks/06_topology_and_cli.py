# coding: utf-8

# # Topologies and the command line
#
# Topologies can be generated or read from a small text file.  Obstacles
# are axis-aligned boxes that block line of sight.

# In[1]:

import tempfile
from pathlib import Path

import numpy as np

from beamacq.arrays import ArrayGeometry
from beamacq.cli import main
from beamacq.scenario import TopologyParams, generate_topology, los_state, read_topology, write_topology

g = ArrayGeometry("ULA", 2, 16)
params = TopologyParams(num_aps=3, inter_ap_distance_m=250.0, num_mobiles=20, num_obstacles=8000,
                        ap_geometry=g, mobile_geometry=g)
topo = generate_topology("triangle", params, np.random.default_rng(4))
los = [los_state(a.position, m.position, topo.obstacles) for a in topo.aps for m in topo.mobiles]
print("line-of-sight fraction:", np.mean(los))


# Round trip through the file format.

# In[2]:

tmp = Path(tempfile.mkdtemp())
write_topology(topo, tmp / "topo.txt")
back = read_topology(tmp / "topo.txt", g, g)
print(len(back.aps), "APs,", len(back.mobiles), "mobiles,", len(back.obstacles), "obstacles")
print((tmp / "topo.txt").read_text().splitlines()[:3])


# The CLI runs any study from a TOML config and writes CSV files whose
# header echoes the full resolved config.

# In[3]:

(tmp / "run.toml").write_text("[scenario]\nnum_mobiles = 4\n\n[study]\ntrials = 2\nbeams = [4, 8]\n")
code = main(["compare-estimators", "--config", str(tmp / "run.toml"), "--out", str(tmp)])
print("exit code", code)
for p in sorted(tmp.glob("*.csv")):
    print(p.name, len(p.read_text().splitlines()), "lines")
