# coding: utf-8

# # Graph Fourier basis and sampling sets
#
# Build the 50-node geometric test graph, look at its Laplacian spectrum, and
# pick 10 vertices with each greedy rule.  Nothing here is random except the
# graph itself (fixed seed).

# In[1]:

import numpy as np

from graphlms.graph import decompose, gft, inverse_gft
from graphlms.operators import BandLimiter, FrequencySet, dbar_b_norm
from graphlms.sampling import select
from graphlms.scenarios import bandlimited_test_signal, benchmark_graph

g, pos, radius = benchmark_graph()
spec = decompose(g)
print("nodes", g.n_nodes, "edges", len(g.edges()), "radius %.3f" % radius)
print("first eigenvalues", np.round(spec.eigenvalues[:6], 4))

# A band-limited signal lives on the first 10 frequencies.  Its GFT is the
# indicator of that band, and the inverse transform gets the signal back.

# In[2]:

f = FrequencySet.lowpass(10, 50)
x = bandlimited_test_signal(spec, f, "unit")
s = gft(spec, x)
print("energy outside F:", float(np.sum(s[10:] ** 2)))
print("round trip error:", np.abs(inverse_gft(spec, s) - x).max())

# The sampling set matters through ||Dbar B||.  Anything below one means the
# 10 samples pin down the signal; random picks often do not.

# In[3]:

band = BandLimiter(spec, f)
var = np.random.default_rng(1).uniform(0, 0.01, 50)
for kind in ("max_det", "max_lambda_min", "min_msd", "random"):
    sset = select(kind, spec, f, 10, noise_var=var, step_size=0.5)
    print("%-15s %s  ||Dbar B|| = %.6f" % (kind, sset.indices, dbar_b_norm(sset, band)))
