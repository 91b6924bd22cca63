"""Single-qubit semigroups: spectra, mixing times and the detailed-balance bound.

Run with ``python demos/01_single_qubit.py``.
"""
import math

from lindbench import LatticeGeometry, builtin, instantiate, mixing_time, spectral_gap
from lindbench.mixing import bound_check, mixing_curve

for name in ("independent_depolarizing", "independent_amplitude_damping"):
    g = instantiate(builtin(name, gamma=1.0), LatticeGeometry.chain(1))
    print(f"{name}: gap = {spectral_gap(g):.6f}, tau(0.01) = {mixing_time(g, 0.01):.6f}")

# Depolarizing noise contracts every state difference by exactly e^{-t}, so tau(eps) = ln(1/eps).
g = instantiate(builtin("independent_depolarizing"), LatticeGeometry.chain(1))
print(f"ln 100 = {math.log(100):.6f}")
curve = mixing_curve(g, [0.5, 1.0, 2.0, 4.0])
for t, eta in zip(curve.t_grid, curve.eta):
    print(f"  t = {t:.1f}: eta = {eta:.6f}, e^-t = {math.exp(-t):.6f}")

# The gap bound tau <= (ln(2/sqrt(sigma_min)) - ln eps) / gap holds with slack ln(2 sqrt 2) here.
rep = bound_check(g, 0.01)
print(f"bound {rep.gap_bound:.6f} vs measured {rep.tau:.6f}: slack {rep.slack:.6f} "
      f"(ln 2sqrt2 = {math.log(2 * math.sqrt(2)):.6f})")

# Amplitude damping relaxes coherences at rate gamma/2, so its mixing time is close to 2 ln 100.
g = instantiate(builtin("independent_amplitude_damping"), LatticeGeometry.chain(1))
print(f"amplitude damping: tau(0.01) = {mixing_time(g, 0.01):.4f}, 2 ln 100 = {2 * math.log(100):.4f}")
