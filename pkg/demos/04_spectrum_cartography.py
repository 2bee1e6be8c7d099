# coding: utf-8

# # Power maps from a few radio access points
#
# 100 RAPs sense the power of two transmitters.  The map is only roughly
# band-limited on the RAP graph, so LMS tracks its low-pass part from a
# subset of the RAPs.

# In[1]:

import numpy as np

from graphlms.graph import decompose, gft
from graphlms.lms import track
from graphlms.operators import BandLimiter, FrequencySet
from graphlms.sampling import select_max_det
from graphlms.scenarios import default_cartography_scenario, pathloss_field

sc = default_cartography_scenario()
spec = decompose(sc.graph())
x = pathloss_field(sc, (0, 1))
energy = np.cumsum(gft(spec, x) ** 2) / np.sum(x**2)
print("energy captured by first 10 / 20 frequencies: %.4f / %.4f" % (energy[9], energy[19]))

# Fewer samples than frequencies breaks reconstruction; a few more fixes it.

# In[2]:

f = FrequencySet.lowpass(10, sc.n_raps)
band = BandLimiter(spec, f)
for m in (5, 10, 15, 25):
    sset = select_max_det(spec, f, m)
    err = track(band, sset, np.tile(x, (600, 1)), sc.noise_var, 0.5, seed=0)
    print("|S| = %2d  NMSD over last 100 iterations %.3e" % (m, err[-100:].mean()))

# Now follow the activity schedule: PU 0, then both, then PU 1.

# In[3]:

signals = np.array([pathloss_field(sc, sc.active_at(k)) for k in range(sc.horizon)])
err = track(band, select_max_det(spec, f, 15), signals, sc.noise_var, 0.5, seed=0)
for k in (130, 260, 399):
    print("iteration %3d  NMSD %.3e" % (k, err[k]))
