# coding: utf-8

# # Codebooks and estimators in a three-AP network
#
# Each trial drops mobiles among three APs and obstacles.  All mobiles
# train at once on their own tones.  We report median post-training SNR.
# Trial counts here are small so the script runs in about a minute.

# In[1]:

from collections import defaultdict

import numpy as np

from beamacq.experiments import ExperimentConfig, StudyConfig, compare_codebooks, compare_estimators, validate
from beamacq.scenario import ScenarioConfig

cfg = validate(ExperimentConfig(ScenarioConfig(), StudyConfig(trials=8, beams=[4, 8, 16], seed=3)))


# In[2]:

med = defaultdict(list)
for r in compare_codebooks(cfg)["compare-codebooks"]:
    med[r["codebook"], r["beams"]].append(r["snr_db"])
print("codebook     n=4    n=8   n=16")
for cb in ["full", "single-rf", "adaptive", "cross", "random"]:
    print(f"{cb:10s}", " ".join(f"{np.median(med[cb, n]):6.1f}" for n in (4, 8, 16)))


# Adaptive sweeping covers all directions with few beams, so it is strong
# when training is short.

# In[3]:

med = defaultdict(list)
for r in compare_estimators(cfg)["compare-estimators"]:
    med[r["estimator"], r["beams"]].append(r["snr_db"])
print("estimator    n=4    n=8   n=16")
for est in ["mp", "ml", "lml", "optimal-dft"]:
    print(f"{est:11s}", " ".join(f"{np.median(med[est, n]):6.1f}" for n in (4, 8, 16)))
