# coding: utf-8

# # When does training lock onto the wrong path?
#
# A three-path link with the two weaker paths 3 and 5 dB down.  A Gaussian
# approximation of the decision statistic predicts how often training
# aligns with each weaker path.  We compare it with Monte Carlo.

# In[1]:

from beamacq.experiments import ExperimentConfig, StudyConfig, link_analysis, validate
from beamacq.scenario import ScenarioConfig

cfg = validate(ExperimentConfig(ScenarioConfig(codebook="full"),
                                StudyConfig(trials=300, estimator="ml", link_beams=32,
                                            link_snrs_db=[10.0, 14.0, 18.0])))
out = link_analysis(cfg)


# In[2]:

print("SNR dB  path  empirical  approx")
for r in out["link-analysis-summary"]:
    print(f"{r['training_snr_db']:6.0f}  {r['path']:4d}  {r['p_empirical']:9.3f}  {r['p_approx']:6.3f}")


# The estimate moves toward the strongest path as the training SNR grows.
# Extra repetitions act like extra power, so the same table can be bought
# with time instead of transmit power.
