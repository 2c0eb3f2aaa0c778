"""Asymptotic circumcenters of flow sets.

The feet of a finite set of geodesic flow elements are pushed forward in time;
the circumcenters of the flowed feet converge to the minimizer of u_K.
"""

# %%
import numpy as np

from circumext.circumcenter import asymptotic_circumcenter, circumcenter_flow_convergence, convergence_csv
from circumext.flow import fan_set, random_flow_set
from circumext.spaces import DiskModel, TreeModel

disk = DiskModel(1.0)
rng = np.random.default_rng(2)

# %% A direction fan is centered at its own base point
x = disk.random_point(rng)
res = asymptotic_circumcenter(fan_set(disk, x, 64))
print("fan base recovered to", disk.distance(res.argmin, x), " u_K =", res.value)

# %% Random flow set: the convergence table
K = random_flow_set(disk, rng, 128)
rows = circumcenter_flow_convergence(K, [0, 1, 2, 4, 6, 8, 10, 12])
print(convergence_csv(rows))

# %% The tree stabilizes after finitely many doublings
tree = TreeModel(3, 1)
res = asymptotic_circumcenter(fan_set(tree, tree.point((0, 1)), 16))
print("tree asymptotic circumcenter:", res.argmin, res.method)
