"""Build the three competitor fields at one (eps, delta) point and compare them.

Run:  python3 demos/01_competitors.py [eps] [delta]
"""
import math
import sys
from fractions import Fraction

from j1j3 import constructions as cons
from j1j3.energy import energy_direct, energy_reformulated
from j1j3.lattice import ModelParams, angles_from_spins, make_grid
from j1j3.sweep import scaling_s
from j1j3.topology import vortex_energy_bound_check, vortices


def main(eps=1 / 128, delta=0.04):
    g = make_grid(eps)
    p = ModelParams.isotropic(delta)
    s, regime = scaling_s(eps, delta)
    print(f"eps = {eps:g} (n = {g.n}), delta = {delta:g}, theta_opt = {p.theta_opt_hor:.6f}")
    print(f"scaling s = {s:.4e}, predicted regime {regime}")

    fields = {
        "ferro": cons.ferromagnet(g),
        "helix": cons.helix(g, p),        # zero energy, but violates the wall condition
        "branch": cons.branching(g, p),
        "vortex": cons.vortex_competitor(g, p),
    }
    print(f"{'field':8} {'E':>12} {'E/s':>8} {'|direct-reform|':>16} {'vortices':>9}")
    for name, u in fields.items():
        e = energy_direct(u, p).total
        r = energy_reformulated(u, p).total
        nv = vortices(angles_from_spins(u)).count
        # relative gap, absolute for the zero-energy helix
        gap = abs(e - r) / e if e > 1e-20 else abs(e - r)
        print(f"{name:8} {e:12.5e} {e / s:8.3f} {gap:16.1e} {nv:9d}")

    rep = vortex_energy_bound_check(fields["vortex"], p)
    print(f"vortex count bound: eps^2 #V = {rep.lhs:.3e} <= 64 E = {rep.rhs:.3e}")
    M = cons.vortex_block_size(delta)
    print(f"block size M = {M}, designed vortices = {math.ceil(g.n / (2 * M))}")


if __name__ == "__main__":
    args = [float(Fraction(a)) for a in sys.argv[1:3]]
    main(*args)
