# coding: utf-8

# # Learning the bandwidth on the fly
#
# When F is unknown, a thresholded LMS step estimates the support and resizes
# the sampling set as it goes.  The truth switches bandwidth twice.

# In[1]:

import numpy as np

from graphlms.adaptive import run_adaptive
from graphlms.graph import decompose
from graphlms.scenarios import benchmark_graph

spec = decompose(benchmark_graph()[0])
n = spec.n_nodes


def truth(k):
    s = np.zeros(n)
    s[:k] = 1.0
    return s


segments = [(100, 5), (100, 15), (100, 10)]
s0 = np.vstack([np.tile(truth(k), (length, 1)) for length, k in segments])

# Hard thresholding keeps surviving coefficients untouched, so it has no bias.
# Lasso shrinks everything by gamma and pays for it in NMSD.

# In[2]:

for rule in ("hard", "garotte", "lasso"):
    tr = run_adaptive(spec, s0, 4e-4, 0.5, 0.1, rule, seed=3)
    ends = [int(tr.support_size[stop - 1]) for stop in (100, 200, 300)]
    print("%-8s |F| at segment ends %s  final NMSD %.2e" % (rule, ends, tr.nmsd[-1]))
