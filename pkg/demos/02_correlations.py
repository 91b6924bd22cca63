"""Correlations of fixed points: the Bell sandwich, product states and graph-state cuts.

Run with ``python demos/02_correlations.py``.
"""
import numpy as np

from lindbench import LatticeGeometry, Operator, SiteFactorization, area_law_scan, builtin, sandwich_check
from lindbench.correlations import covariance_corr, decay_scan

bell = np.zeros((4, 4), dtype=complex)
bell[np.ix_([0, 3], [0, 3])] = 0.5
rho = Operator(bell, SiteFactorization.uniform([0, 1]))
v = sandwich_check(rho, [0])
print(f"Bell state: C = {covariance_corr(rho, [0]):.4f}, T = {v.T:.4f}, I = {v.I:.4f} bits")
print(f"  T^2/4 = {v.lower:.4f} <= I <= {v.upper:.4f}")

for name in ("independent_depolarizing", "graph_state_prep"):
    scan = area_law_scan(builtin(name), [2, 3, 4, 5], "half")
    print(f"{name}: half-cut mutual information per size")
    for r in scan.rows():
        print(f"  n = {r['size']}: I = {r['I']:.6f} bits, |dA| = {r['|dA|']}")

# A Glauber chain in a field has a correlated Gibbs fixed point.  The closed chain wraps around, so
# site 4 is a neighbour of site 0 and the values are symmetric about the middle.
geom = LatticeGeometry.chain(5)
pairs = [([geom.sites[0]], [geom.sites[k]]) for k in range(1, 5)]
scan = decay_scan(builtin("dissipative_ising", h=0.3, beta=0.7), geom, pairs)
print("Ising ring, site 0 against site k:")
for r in scan.records:
    print(f"  k = {r.B[0][0]}: T = {r.T_val:.5f}, I = {r.I_val:.5f}")
