"""The circumcenter extension of a boundary map.

For maps induced by isometries the extension gives the isometry back.  For a
synthetic Moebius metric the nearest visual metric is found, its distance is
at most half of log 2, and the right-angle certificate confirms the minimizer.
"""

# %%
import math

import numpy as np

from circumext.extension import angle_certificate, certified_projection, circumcenter_extension, displaced
from circumext.flow import isometry_map
from circumext.metrics import random_radon_metric
from circumext.spaces import DiskModel

disk = DiskModel(1.0)
rng = np.random.default_rng(3)

# %% Isometry recovery
g = disk.random_isometry(rng, reflect=True)
f = isometry_map(disk, g).validate(rng)
for _ in range(3):
    x = disk.random_point(rng)
    print("d(f_hat(x), g(x)) =", disk.distance(circumcenter_extension(f, x), g.apply_point(x)))

# %% Nearest visual metric to a synthetic metric
rho = random_radon_metric(disk, rng, disk.grid(256))
z, value, worst, ok = certified_projection(rho)
print(f"defect {value:.5f} <= {0.5 * math.log(2):.5f};  worst angle {worst:.4f} (pi/2 = {math.pi / 2:.4f})")

# %% Moving away from the minimizer breaks the certificate
angle, ok = angle_certificate(rho, displaced(z, 0.1, rng))
print("displaced point: worst angle", round(angle, 4), "passes" if ok else "fails")
