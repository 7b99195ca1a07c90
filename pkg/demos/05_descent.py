"""Gradient descent seeded from the best construction, with trace and vortex bookkeeping."""
from j1j3 import constructions as cons
from j1j3.energy import energy_direct
from j1j3.lattice import ModelParams, angles_from_spins, make_grid
from j1j3.optimize import OptimizeOptions, minimize
from j1j3.topology import vortices

g = make_grid(1 / 128)
p = ModelParams.isotropic(0.04)
fields = {"ferro": cons.ferromagnet(g), "branch": cons.branching(g, p), "vortex": cons.vortex_competitor(g, p)}
en = {k: energy_direct(u, p).total for k, u in fields.items()}
best = min(en, key=en.get)
print("construction energies:", {k: f"{v:.5e}" for k, v in en.items()}, "-> seed", best)

u, tr = minimize(fields[best], p, OptimizeOptions(max_iter=500))
e = tr.energies()
print(f"descent: {len(tr)} trace rows, E {e[0]:.6e} -> {e[-1]:.6e}, final |grad|_inf {tr.final_grad_norm:.2e}")
print("vortices before/after:", vortices(angles_from_spins(fields[best])).count,
      vortices(angles_from_spins(u)).count)
