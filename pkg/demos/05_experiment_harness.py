# coding: utf-8

# # Reproducible experiments
#
# Every experiment is a config dict (or JSON file).  Results land in CSVs
# next to a manifest, and a rerun with the same seed is byte-identical.  The
# same thing is available as ``graphlms experiment run --config cfg.json``.

# In[1]:

import tempfile
from pathlib import Path

from graphlms.harness import EXPERIMENTS, run_experiment

print(sorted(EXPERIMENTS))

out = Path(tempfile.mkdtemp())
res = run_experiment({"experiment": "fig4", "n_trials": 20, "seed": 0, "output": str(out),
                      "params": {"m_values": [10, 14, 20]}})
for key, val in sorted(res.summary["median_msd"].items()):
    print("%-20s %.5f" % (key, val))

# In[2]:

again = run_experiment({"experiment": "fig4", "n_trials": 20, "seed": 0, "output": str(out / "again"),
                        "params": {"m_values": [10, 14, 20]}})
print("identical:", res.outputs[0].read_bytes() == again.outputs[0].read_bytes())
print(res.manifest.read_text()[:300])
