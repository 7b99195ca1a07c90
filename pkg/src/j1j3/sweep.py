"""Scaling function, regimes and the (eps, delta) phase sweep over competitor fields."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constructions as cons
from .energy import energy_direct
from .lattice import ModelParams, angles_from_spins, make_grid
from .optimize import OptimizeOptions, minimize
from .topology import vortices

CSV_HEADER = ["eps", "delta", "e_ferro", "e_branch", "e_vortex", "e_opt",
              "s", "regime", "winner", "n_vortices", "wall_ms"]
STRATEGIES = ("ferro", "branch", "vortex")
ERROR = "error"


def scaling_s(eps: float, delta: float) -> tuple[float, str]:
    """min{delta^2, eps delta^1.5 (|ln(eps/delta^.5)|+1), eps delta^.5} and its regime label."""
    if not (0.0 < eps < 0.5) or not (0.0 < delta < 1.0):
        raise ValueError(f"(eps, delta) = ({eps!r}, {delta!r}) outside (0, 1/2) x (0, 1)")
    rd = math.sqrt(delta)
    value = min(delta**2, eps * delta**1.5 * (abs(math.log(eps / rd)) + 1), eps * rd)
    if rd <= eps:
        regime = "F"
    elif math.e * rd * math.exp(-1.0 / delta) <= eps:
        regime = "B"
    else:
        regime = "VS"
    return value, regime


@dataclass
class SweepRecord:
    eps: float
    delta: float
    e_ferro: float = math.nan
    e_branch: float = math.nan
    e_vortex: float = math.nan
    e_opt: float = math.nan
    s_value: float = math.nan
    regime: str = ""
    winner: str = ""
    n_vortices: int = 0
    wall_ms: float = 0.0
    errors: dict = field(default_factory=dict)

    def energies(self) -> dict:
        return {"ferro": self.e_ferro, "branch": self.e_branch, "vortex": self.e_vortex, "opt": self.e_opt}

    @property
    def e_best(self) -> float:
        vals = [v for v in self.energies().values() if math.isfinite(v)]
        return min(vals) if vals else math.nan

    def csv_row(self) -> list[str]:
        def cell(name, v):
            if name in self.errors:
                return ERROR
            return "" if (isinstance(v, float) and math.isnan(v)) else format(v, ".17g")

        return [format(self.eps, ".17g"), format(self.delta, ".17g"),
                cell("ferro", self.e_ferro), cell("branch", self.e_branch),
                cell("vortex", self.e_vortex), cell("opt", self.e_opt),
                format(self.s_value, ".17g"), self.regime, self.winner,
                str(self.n_vortices), format(self.wall_ms, ".3f")]


_BUILDERS = {
    "ferro": lambda g, p: cons.ferromagnet(g),
    "branch": cons.branching,
    "vortex": cons.vortex_competitor,
}


def run_cell(eps: float, delta: float, strategies=STRATEGIES, optimize: bool = False,
             opt_options: OptimizeOptions | None = None) -> SweepRecord:
    t0 = time.perf_counter()
    rec = SweepRecord(eps, delta)
    rec.s_value, rec.regime = scaling_s(eps, delta)
    g = make_grid(eps)
    p = ModelParams.isotropic(delta)
    fields = {}
    for name in strategies:
        try:
            u = _BUILDERS[name](g, p)
            fields[name] = u
            setattr(rec, f"e_{name}", energy_direct(u, p).total)
        except Exception as exc:  # recorded, not dropped
            rec.errors[name] = f"{type(exc).__name__}: {exc}"
    if optimize and fields:
        best = min(fields, key=lambda k: getattr(rec, f"e_{k}"))
        try:
            u, _ = minimize(fields[best], p, opt_options or OptimizeOptions())
            fields["opt"] = u
            rec.e_opt = energy_direct(u, p).total
        except Exception as exc:
            rec.errors["opt"] = f"{type(exc).__name__}: {exc}"
    en = {k: v for k, v in rec.energies().items() if math.isfinite(v)}
    if en:
        # ties go to the earlier strategy in the listing order
        rec.winner = min(en, key=lambda k: en[k])
        rec.n_vortices = vortices(angles_from_spins(fields[rec.winner])).count
    else:
        rec.winner = ERROR
    rec.wall_ms = 1e3 * (time.perf_counter() - t0)
    return rec


def _cell_job(args):
    return run_cell(*args)


def phase_sweep(eps_list, delta_list, strategies=STRATEGIES, *, optimize: bool = False,
                opt_options: OptimizeOptions | None = None, threads: int = 1,
                csv_path=None) -> list[SweepRecord]:
    """Run every (eps, delta) cell; records are ordered delta-major, eps-minor.

    With ``csv_path`` each record is appended as soon as it and all earlier
    cells are done, so a crashed sweep keeps its finished prefix.
    """
    strategies = tuple(strategies)
    if not strategies:
        raise ValueError("need at least one strategy")
    bad = [s for s in strategies if s not in _BUILDERS]
    if bad:
        raise ValueError(f"unknown strategies {bad}")
    cells = [(float(e), float(d)) for d in delta_list for e in eps_list]
    for e, d in cells:
        scaling_s(e, d)
    jobs = [(e, d, strategies, optimize, opt_options) for e, d in cells]
    fh = writer = None
    if csv_path is not None:
        fh = open(csv_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        fh.flush()
    out: list[SweepRecord | None] = [None] * len(jobs)
    nxt = 0

    def emit():
        nonlocal nxt
        while nxt < len(out) and out[nxt] is not None:
            if writer is not None:
                writer.writerow(out[nxt].csv_row())
                fh.flush()
            nxt += 1

    try:
        if threads <= 1:
            for k, job in enumerate(jobs):
                out[k] = _cell_job(job)
                emit()
        else:
            with ProcessPoolExecutor(max_workers=threads) as ex:
                futs = [ex.submit(_cell_job, job) for job in jobs]
                for k, fu in enumerate(futs):
                    out[k] = fu.result()
                    emit()
    finally:
        if fh is not None:
            fh.close()
    return out  # type: ignore[return-value]


def write_winner_grid(records, path):
    eps = sorted({r.eps for r in records}, reverse=True)
    deltas = sorted({r.delta for r in records}, reverse=True)
    cell = {(r.eps, r.delta): r.winner for r in records}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta"] + [format(e, ".17g") for e in eps])
        for d in deltas:
            w.writerow([format(d, ".17g")] + [cell.get((e, d), "") for e in eps])


@dataclass
class ConstantFit:
    C: float
    slope: float
    count: int


def fit_constant(records, regime: str | None = None) -> ConstantFit:
    """Max of E_best/s over the records in ``regime`` and the log-log slope of E_best against s."""
    sel = [r for r in records if (regime is None or r.regime == regime) and math.isfinite(r.e_best)]
    if len(sel) < 3:
        raise ValueError(f"need at least 3 records in regime {regime!r}, got {len(sel)}")
    e = np.array([r.e_best for r in sel])
    s = np.array([r.s_value for r in sel])
    C = float(np.max(e / s))
    x, y = np.log(s), np.log(e)
    slope = float(np.polyfit(x, y, 1)[0]) if np.ptp(x) > 0 else math.nan
    return ConstantFit(C, slope, len(sel))
