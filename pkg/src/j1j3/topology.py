"""Discrete curl, vortices, the vortex-count energy bound and potentials of
curl-free angle fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import energy_direct, large_angle_set
from .lattice import (
    CURL_TOL,
    AngularField,
    Grid,
    ModelParams,
    SpinField,
    angles_from_spins,
    check_quantized,
    plaquette_curl,
)


@dataclass(frozen=True, eq=False)
class CurlField:
    grid: Grid
    values: np.ndarray  # shape (n - 1, n - 1), eps * curl


@dataclass(frozen=True)
class VortexSet:
    plaquettes: tuple  # ((i, j, winding), ...)

    @property
    def count(self) -> int:
        return len(self.plaquettes)

    def to_json_list(self) -> list[dict]:
        return [{"i": int(i), "j": int(j), "winding": int(w)} for i, j, w in self.plaquettes]


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    grid: Grid
    u: np.ndarray
    scale: float


def discrete_curl(theta: AngularField) -> CurlField:
    return CurlField(theta.grid, plaquette_curl(theta.theta_hor, theta.theta_ver))


def vortices(theta: AngularField, tol: float = CURL_TOL) -> VortexSet:
    c = discrete_curl(theta).values
    check_quantized(c, tol)
    k = np.round(c / (2 * np.pi)).astype(int)
    idx = np.argwhere(k != 0)
    return VortexSet(tuple((int(i), int(j), int(k[i, j])) for i, j in idx))


@dataclass
class VortexBoundReport:
    n_vortices: int
    lhs: float  # eps^2 #V
    rhs: float  # 64 E
    energy: float
    large_angle_hor: tuple  # (lhs, rhs) at beta = pi/2
    large_angle_ver: tuple
    min_max_angle: float  # over vortices, smallest of the largest |angle| around the plaquette

    @property
    def holds(self) -> bool:
        angle_ok = self.n_vortices == 0 or self.min_max_angle >= np.pi / 2 - 1e-12
        return self.lhs <= self.rhs * (1 + 1e-12) and angle_ok


def vortex_energy_bound_check(u: SpinField, p: ModelParams) -> VortexBoundReport:
    delta = p.isotropic_delta
    if not (0.0 < delta < 0.5):
        raise ValueError(f"vortex bound needs delta in (0, 1/2), got {delta!r}")
    theta = angles_from_spins(u)
    vs = vortices(theta)
    eb = energy_direct(u, p)
    eps = u.grid.eps
    ah = large_angle_set(theta, np.pi / 2, "hor", p, energy=eb.e_hor)
    av = large_angle_set(theta, np.pi / 2, "ver", p, energy=eb.e_ver)
    mm = np.inf
    th, tv = theta.theta_hor, theta.theta_ver
    for i, j, _ in vs.plaquettes:
        m = max(abs(th[i, j]), abs(th[i, j + 1]), abs(tv[i, j]), abs(tv[i + 1, j]))
        mm = min(mm, m)
    return VortexBoundReport(
        vs.count, eps**2 * vs.count, 64.0 * eb.total, eb.total,
        (ah.lhs, ah.rhs), (av.lhs, av.rhs), float(mm),
    )


def potential(theta: AngularField, scale: float = 1.0, tol: float = CURL_TOL) -> PotentialGrid:
    """Scalar u with u(0,0) = 0 and discrete derivatives scale * theta.

    Column 0 is integrated with theta_ver, then each row with theta_hor.
    """
    c = discrete_curl(theta).values
    if c.size and np.max(np.abs(c)) > tol:
        i, j = np.unravel_index(np.argmax(np.abs(c)), c.shape)
        raise ValueError(f"field is not curl-free: eps*curl = {c[i, j]:.6g} at plaquette ({i}, {j})")
    g = theta.grid
    h = g.eps * scale
    n = g.n
    u = np.zeros((n, n))
    u[0, 1:] = h * np.cumsum(theta.theta_ver[0, :])
    u[1:, :] = u[0, :] + h * np.cumsum(theta.theta_hor, axis=0)
    return PotentialGrid(g, u, scale)


def gradient_field(grid: Grid, u: np.ndarray) -> AngularField:
    """Discrete gradient (forward differences divided by eps) packaged as angles."""
    u = np.asarray(u, dtype=float)
    return AngularField(grid, np.diff(u, axis=0) / grid.eps, np.diff(u, axis=1) / grid.eps)
