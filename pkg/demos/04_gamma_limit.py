"""Recovery sequences for the shear field (w, z) = (y, x) and their renormalized energies.

H(y, x) = 2 int_0^1 (t^2 - 1)^2 dt = 16/15.  Coarse levels miss the exact
periodicity tolerance and report H_n = inf; the raw ratio shows the trend.
"""
from j1j3.continuum import GammaSchedule, H_continuum, gamma_experiment, shear_field

f = shear_field()
print(f"H(f) by quadrature = {H_continuum(f).value:.10f}  (16/15 = {16 / 15:.10f})")
rows = gamma_experiment(f, GammaSchedule.dyadic(range(4, 10)))
print(f"{'n':>3} {'eps':>10} {'H_n':>10} {'raw':>10} {'raw gap':>10} {'periodicity':>12}")
for r in rows:
    print(f"{r.n:>3} {r.eps:>10.3g} {r.H_n:>10.5g} {r.H_n_raw:>10.5f} {abs(r.H_n_raw - r.H):>10.2e} "
          f"{r.periodicity:>12.1e}")
