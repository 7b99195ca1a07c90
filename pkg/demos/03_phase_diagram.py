"""Small phase-diagram sweep; prints the winner map and writes plot-ready CSVs.

Equivalent CLI:
    j1j3 sweep --eps-list "2^-4 2^-5 2^-6 2^-7" --delta-list "2^-2 2^-4 2^-6 2^-8" \\
               --out sweep.csv --plot-data winners.csv
"""
import math

from j1j3.sweep import fit_constant, phase_sweep, write_winner_grid

eps = [2.0**-k for k in range(4, 8)]
deltas = [2.0**-k for k in (2, 4, 6, 8)]
recs = phase_sweep(eps, deltas, threads=2, csv_path="sweep.csv")
write_winner_grid(recs, "winners.csv")

cell = {(r.eps, r.delta): r for r in recs}
print("delta \\ eps " + "".join(f"{e:>10.4g}" for e in eps))
for d in deltas:
    row = "".join(f"{cell[(e, d)].winner[:6]:>10}" for e in eps)
    print(f"{d:<12.4g}" + row)
print("regime labels (F | B | VS) from the scaling function:")
for d in deltas:
    print(f"{d:<12.4g}" + "".join(f"{cell[(e, d)].regime:>10}" for e in eps))

fit = fit_constant(recs)
print(f"max E_best / s = {fit.C:.3f}, log-log slope {fit.slope:.3f} over {fit.count} cells")
errs = [(r.eps, r.delta, k) for r in recs for k in r.errors]
if errs:
    print(f"{len(errs)} inapplicable constructions recorded as errors, e.g. {errs[0]}")
