"""Boundary calculus on the disk and the trivalent tree.

Closed forms for Gromov products, Busemann functions and visual metrics are
compared against their defining radial limits, then the comparison-angle
identities are checked on a few triangles.
"""

# %%
import math

import numpy as np

from circumext import boundary as bd
from circumext.spaces import DiskModel, TreeModel

disk = DiskModel(1.0)
tree = TreeModel(3, 1)
rng = np.random.default_rng(0)

# %% Gromov product at the origin for ends a quarter turn apart
o = disk.origin
a, b = disk.end(0.0), disk.end(math.pi / 2)
print("closed form  ", bd.gromov_product(disk, o, a, b))
print("radial limit ", bd.oracle_gromov_product(disk, o, a, b))
print("-log sin(pi/4)", -math.log(math.sin(math.pi / 4)))

# %% Busemann functions: closed form, coordinates and radial limit agree
x, y = disk.random_point(rng), disk.random_point(rng)
xi = disk.random_end(rng)
print("B(x, y, xi):", bd.busemann(disk, x, y, xi), bd.disk_closed_form_busemann(x, y, xi.angle),
      bd.oracle_busemann(disk, x, y, xi))

# %% The visual metric has diameter one and every point has an antipode
dmax, partner = bd.grid_diameter_antipodality(disk, x, disk.grid(64, center=x))
print(f"diameter {dmax:.12f}, worst antipode {partner:.12f}")

# %% Comparison angles: 2 arcsin(rho^k) against finite triangles far out
for _ in range(3):
    p = disk.random_point(rng, 2.0)
    u, v = disk.random_end(rng), disk.random_end(rng)
    print(f"limit {bd.comparison_angle(disk, p, u, v):.8f}   finite {bd.oracle_comparison_angle(disk, p, u, v):.8f}")

# %% On the tree everything is exact rational arithmetic
s, t = tree.point((0, 1, 2)), tree.point((1,))
end = tree.end((0, 1), (0, 1))
print("tree distance", tree.distance(s, t), " Busemann", tree.busemann(s, t, end))
