# coding: utf-8

# # Steady-state MSD: closed form against Monte Carlo
#
# The compact LMS recursion is linear in the error, so its mean-square
# deviation has a closed form.  Here we compare it with a few simulated runs
# and then invert it to pick a step size for a target MSD.

# In[1]:

import numpy as np

from graphlms.graph import decompose
from graphlms.harness import steady_state_average, tune_step_for_target_msd
from graphlms.lms import ObservationModel, max_stable_step, run
from graphlms.operators import BandLimiter, FrequencySet
from graphlms.sampling import select_max_det
from graphlms.scenarios import bandlimited_test_signal, benchmark_graph
from graphlms.theory import build_theory, msd_eigen_expansion, per_vertex_msd_all, steady_state_msd

spec = decompose(benchmark_graph()[0])
f = FrequencySet.lowpass(10, 50)
band = BandLimiter(spec, f)
sset = select_max_det(spec, f, 10)
var = np.random.default_rng(1).uniform(0, 0.01, 50)
x0 = bandlimited_test_signal(spec, f, "unit")

mu = 0.5
theory = build_theory(spec, f, sset, var, mu)
print("spectral radius of Q: %.6f" % theory.spectral_radius)
print("closed form MSD:      %.6e" % steady_state_msd(theory))

# Average 20 runs over the final 100 iterations.

# In[2]:

sims = []
for trial in range(20):
    m = ObservationModel(x0, var, sset, band, seed=trial)
    sims.append(steady_state_average(run(m, mu, 1500).squared_deviation))
print("simulated MSD:        %.6e" % np.mean(sims))
print("largest step allowed: %.4f" % max_stable_step(m))

# The total splits over the eigenmodes of M kron M.  Only a handful of the
# |F|^2 modes carry any noise; list the three largest.

# In[3]:

modes = sorted(msd_eigen_expansion(theory), key=lambda md: -md.term)
for md in modes[:3]:
    print("eigenvalue %.4f  contributes %.3e" % (md.value, md.term))
print("worst vertex", int(np.argmax(per_vertex_msd_all(theory))))

# Going the other way: which step gives MSD = 1e-3?

# In[4]:

mu_star = tune_step_for_target_msd(spec, f, sset, var, 1e-3)
print("mu = %.5f gives MSD %.3e" % (mu_star, steady_state_msd(build_theory(spec, f, sset, var, mu_star))))
