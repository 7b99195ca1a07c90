"""Measured energy constants of the branching and vortex competitors.

The upper bounds predict E_branch ~ eps delta^1.5 (|ln(eps/delta^.5)| + 1)
and E_vortex ~ eps delta^.5.  The ratios printed here should stay in a
narrow band as eps shrinks.
"""
import math

from j1j3 import constructions as cons
from j1j3.energy import energy_direct
from j1j3.lattice import ModelParams, make_grid

d = 0.25
p = ModelParams.isotropic(d)
print("branching, delta = 1/4")
for k in range(5, 9):
    eps = 2.0**-k
    e = energy_direct(cons.branching(make_grid(eps), p), p).total
    ref = eps * d**1.5 * (abs(math.log(eps / math.sqrt(d))) + 1)
    print(f"  eps = 2^-{k}:  E = {e:.5e}   E/ref = {e / ref:.3f}")

d = 0.04
p = ModelParams.isotropic(d)
print("vortex strip, delta = 0.04")
for k in range(6, 10):
    eps = 2.0**-k
    e = energy_direct(cons.vortex_competitor(make_grid(eps), p), p).total
    print(f"  eps = 2^-{k}:  E = {e:.5e}   E/(eps delta^.5) = {e / (eps * math.sqrt(d)):.3f}")
