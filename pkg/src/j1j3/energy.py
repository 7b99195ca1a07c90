"""Discrete J1-J3 energy: direct next-nearest-neighbour sums, chirality
reformulation, the auxiliary functions q and p, the renormalized energy and
large-angle diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .lattice import (
    AngularField,
    ModelParams,
    SpinField,
    angles_from_spins,
    chirality_from_angles,
)

P_SWITCH = 1e-6
BC_TOL = 1e-9


@dataclass
class EnergyBreakdown:
    e_hor: float
    e_ver: float
    total: float
    well_hor: float = float("nan")
    well_ver: float = float("nan")
    interface_hor: float = float("nan")
    interface_ver: float = float("nan")
    n_terms_hor: int = 0
    n_terms_ver: int = 0
    n_vortices: int | None = None
    reason: str | None = None

    def to_json_dict(self) -> dict:
        d = asdict(self)
        keys = ["e_hor", "e_ver", "total", "well_hor", "well_ver",
                "interface_hor", "interface_ver", "n_vortices", "reason"]
        out = {}
        for k in keys:
            v = d[k]
            if isinstance(v, float) and not math.isfinite(v):
                v = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
            out[k] = v
        return out


def _region_slices(n: int, region, span: int, axis: int):
    """Summand start indices along ``axis`` inside a closed index rectangle.

    ``region`` is ``(i0, i1, j0, j1)``; a summand starting at (i, j) counts if
    (i, j) lies in the rectangle and (i, j) is in the NN index set.
    """
    if region is None:
        lo = (0, 0)
        hi = (n - 1, n - 1)
    else:
        i0, i1, j0, j1 = (int(r) for r in region)
        if not (0 <= i0 <= i1 <= n - 1 and 0 <= j0 <= j1 <= n - 1):
            raise ValueError(f"region {region} outside grid with n={n}")
        lo, hi = (i0, j0), (i1, j1)
    sl = []
    for ax in (0, 1):
        top = hi[ax]
        if ax == axis:
            top = min(top, n - 1 - span)
        sl.append(slice(lo[ax], max(top + 1, lo[ax])))
    return tuple(sl)


def _nnn_sum(s: np.ndarray, c: float, axis: int, region) -> tuple[float, int]:
    n = s.shape[0]
    if n < 3:
        return 0.0, 0
    if axis == 0:
        r = s[:-2, :] - 2 * c * s[1:-1, :] + s[2:, :]
    else:
        r = s[:, :-2] - 2 * c * s[:, 1:-1] + s[:, 2:]
    # r has shape of the NN set; restrict to summand starts in region
    sl = _region_slices(n, region, 2, axis)
    r = r[sl]
    sq = np.sum(r * r, axis=-1)
    return float(np.sum(sq)), int(sq.size)


def energy_direct(u: SpinField, p: ModelParams, region=None) -> EnergyBreakdown:
    eps = u.grid.eps
    s = u.spins
    eh, nh = _nnn_sum(s, 1.0 - p.delta_hor, 0, region)
    ev, nv = _nnn_sum(s, 1.0 - p.delta_ver, 1, region)
    eh *= eps**2 / 2
    ev *= eps**2 / 2
    return EnergyBreakdown(eh, ev, eh + ev, n_terms_hor=nh, n_terms_ver=nv)


def q_fn(theta1, theta2):
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    return np.sin(t1) ** 2 + np.sin(t2) ** 2 - (1.0 - np.cos(t1 + t2))


def p_fn(theta1, theta2):
    """q / (2 (sin(t2/2) - sin(t1/2))^2), continuously extended to 1 on the diagonal."""
    t1, t2 = np.broadcast_arrays(np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float))
    diff = np.sin(t2 / 2) - np.sin(t1 / 2)
    small = np.abs(diff) < P_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = q_fn(t1, t2) / (2 * diff**2)
        cs = np.cos((t1 + t2) / 4)
        stable = np.cos((t2 - t1) / 4) ** 2 * np.cos(t1 + t2) / cs**2
    # 0/0 in the stable form only at the corners (+-pi, +-pi); use the diagonal limit
    stable = np.where(np.abs(cs) < 1e-12, 1.0, stable)
    out = np.where(small, stable, raw)
    out = np.where(t1 == t2, 1.0, out)
    return out[()] if out.ndim == 0 else out


def _reform_dir(theta: np.ndarray, w: np.ndarray, delta: float, eps: float, axis: int):
    """Well and interface parts for one direction; theta, w live on the N index set."""
    if theta.shape[axis] < 2:
        return 0.0, 0.0
    if axis == 0:
        a, b = theta[:-1, :], theta[1:, :]
        wa, wb = w[:-1, :], w[1:, :]
    else:
        a, b = theta[:, :-1], theta[:, 1:]
        wa, wb = w[:, :-1], w[:, 1:]
    well = delta**2 * eps**2 * (np.sum((1 - wa**2) ** 2) + np.sum((1 - wb**2) ** 2))
    inter = delta * eps**2 * np.sum(p_fn(a, b) * (wb - wa) ** 2)
    return float(well), float(inter)


def energy_reformulated(u: SpinField, p: ModelParams) -> EnergyBreakdown:
    theta = angles_from_spins(u)
    chi = chirality_from_angles(theta, p)
    eps = u.grid.eps
    wh, ih = _reform_dir(theta.theta_hor, chi.w, p.delta_hor, eps, 0)
    wv, iv = _reform_dir(theta.theta_ver, chi.z, p.delta_ver, eps, 1)
    n = u.grid.n
    nn = max(n - 2, 0) * n
    return EnergyBreakdown(wh + ih, wv + iv, wh + ih + wv + iv, wh, wv, ih, iv, nn, nn)


def boundary_violation(u: SpinField) -> float:
    return float(np.max(np.abs(u.spins[0, :, :] - np.array([0.0, 1.0]))))


def periodicity_violation(u: SpinField) -> float:
    """Largest mismatch of the periodic dot-product conditions."""
    s = u.spins
    left = np.sum(s[0, :] * s[1, :], axis=-1)
    right = np.sum(s[-2, :] * s[-1, :], axis=-1)
    bottom = np.sum(s[:, 0] * s[:, 1], axis=-1)
    top = np.sum(s[:, -2] * s[:, -1], axis=-1)
    return float(max(np.max(np.abs(left - right)), np.max(np.abs(bottom - top))))


@dataclass
class Renormalized:
    value: float
    reason: str | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def renormalized_Hn(u: SpinField, p: ModelParams, tol: float = BC_TOL) -> Renormalized:
    if boundary_violation(u) > tol:
        return Renormalized(math.inf, "boundary")
    if periodicity_violation(u) > tol:
        return Renormalized(math.inf, "periodicity")
    e = energy_direct(u, p).total
    return Renormalized(e / (math.sqrt(2.0) * u.grid.eps * p.delta_ver**1.5))


@dataclass
class LargeAngleReport:
    indices: np.ndarray
    count: int
    lhs: float
    rhs: float
    beta: float
    direction: str

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)


def large_angle_set(theta: AngularField, beta: float, direction: str,
                    p: ModelParams, energy: float | None = None,
                    u: SpinField | None = None) -> LargeAngleReport:
    """Bonds with |theta| >= beta and the counting bound eps^2 #A <= 2E/((1-d)^2 (1-d-cos b)^2).

    ``energy`` is the directional energy (E_hor or E_ver matching
    ``direction``); pass it, or the spin field it comes from.  At
    beta = 2pi/3 the constant 8/(1-d)^2 is used.
    """
    if direction not in ("hor", "ver"):
        raise ValueError("direction must be 'hor' or 'ver'")
    beta_min = max(p.theta_opt_hor, p.theta_opt_ver)
    if not (beta_min < beta <= np.pi):
        raise ValueError(f"beta must lie in ({beta_min:.6g}, pi], got {beta!r}")
    delta = p.delta_hor if direction == "hor" else p.delta_ver
    arr = theta.theta_hor if direction == "hor" else theta.theta_ver
    idx = np.argwhere(np.abs(arr) >= beta)
    if energy is None:
        if u is None:
            raise ValueError("need energy or spin field for the bound")
        eb = energy_direct(u, p)
        energy = eb.e_hor if direction == "hor" else eb.e_ver
    if math.isclose(beta, 2 * np.pi / 3, rel_tol=0, abs_tol=1e-12):
        rhs = 8.0 / (1 - delta) ** 2 * energy
    else:
        rhs = 2.0 * energy / ((1 - delta) ** 2 * (1 - delta - np.cos(beta)) ** 2)
    lhs = theta.grid.eps**2 * len(idx)
    return LargeAngleReport(idx, len(idx), lhs, float(rhs), float(beta), direction)
