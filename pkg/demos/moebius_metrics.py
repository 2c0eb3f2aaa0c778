"""Moebius metrics: visual metrics, synthetic Radon-norm metrics and d_M.

A Radon norm on the plane together with an SL(2) matrix yields a boundary
metric that is Moebius equivalent to a visual metric without being one.
"""

# %%
import math

import numpy as np

from circumext.metrics import (
    MoebiusMetric,
    dM_distance,
    maxmin_report,
    random_radon_metric,
    validate_metric,
)
from circumext.spaces import DiskModel

disk = DiskModel(1.0)
grid = disk.grid(256)
rng = np.random.default_rng(1)

# %% Visual metrics embed isometrically
x, y = disk.origin, disk.point(0.5, 0.0)
rx, ry = MoebiusMetric.visual(disk, x), MoebiusMetric.visual(disk, y)
print("d_M =", dM_distance(rx, ry, grid), " d =", disk.distance(x, y), " log 3 =", math.log(3))

# %% The derivative dry/drx peaks at 3 and bottoms out at 1/3
rep = maxmin_report(ry, rx, grid)
print("max", math.exp(rep.log_max), "min", math.exp(rep.log_min), "product residual", rep.product_residual)

# %% A synthetic metric from an l_p / l_q Radon norm
rho = random_radon_metric(disk, rng, grid)
print("provenance", rho.provenance["kind"], "p =", round(rho.provenance["p"], 3))
print("distance to the origin's visual metric:", dM_distance(rho, rx, grid))

# %% Grid validation rejects perturbations that break the metric axioms
for scale in (0.1, 5.0):
    r = validate_metric(MoebiusMetric.synthetic(disk, lambda t, c=scale: c * np.cos(t)), grid)
    print(f"{scale} cos(theta): checks {r.checks}, witness {r.witness}")
