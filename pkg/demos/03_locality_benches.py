"""Locality and stability experiments on short chains.

Run with ``python demos/03_locality_benches.py``; it takes a few seconds.
"""
import numpy as np

from lindbench import LatticeGeometry, bench, builtin
from lindbench.operators import Z

# An extra dephasing on the far end of a long-range chain is felt at the first site only at second order in t.
g1, g2, o, terms, nu, v, geom = bench.perturbed_chain_instance(5)
grid = np.geomspace(1e-3, 2.0, 25)
res = bench.lr_localization(g1, g2, o, grid, terms, nu, v, geom=geom)
print(f"localization: bound holds = {res.passed}, small-t slopes {res.extra['lhs_slope']:.3f} (measured) "
      f"and {res.extra['rhs_slope']:.3f} (bound), v = {v:.3f}")

# Open versus closed boundary conditions seen from the centre of growing boxes.
ising = builtin("dissipative_ising", h=0.3, beta=0.7)
geoms = [LatticeGeometry.chain(n, -(n // 2)) for n in (1, 3, 5)]
res = bench.boundary_localization(ising, geoms, [(0,)], Z, np.geomspace(1e-2, 5.0, 10))
for r, row in zip(res.extra["r"], res.measured):
    print(f"boundary at distance {r}: divergence at t = 5 is {row[-1]:.3e}")

# Local observables respond linearly to a weak extra noise ...
dep = builtin("independent_depolarizing")
t = np.geomspace(1e-3, 10.0, 25)
res = bench.stability(dep, LatticeGeometry.chain(3), bench.bit_flip_perturbation(), [0.0, 1e-3, 1e-2, 1e-1],
                      Z, [(0,)], t)
print(f"stability: slope in eps = {res.extra['slope']:.3f}")

# ... while a global observable under amplitude damping drifts further the larger the chain.
growth = bench.global_observable_growth(builtin("independent_amplitude_damping"), [2, 3, 4],
                                        bench.bit_flip_perturbation(), 0.1, t)
print("global Z^n divergence by size:", [round(x, 4) for x in growth.measured])
