"""Continuum side of the chirality model: lattice extensions, the Modica-Mortola
type functional H, recovery sequences and the level-by-level comparison of the
renormalized discrete energy with H."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .energy import Renormalized, energy_direct, periodicity_violation, renormalized_Hn
from .lattice import AngularField, Grid, ModelParams, SpinField, make_grid, spins_from_angles

DOMAIN_TOL = 1e-6
TRACE_POINTS = 1024
CURL_GRID = 256
FD_STEP = 1e-5


# ---------------------------------------------------------------- extensions

def _cell_index(grid: Grid, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x < 0) | (x >= 1) | (y < 0) | (y >= 1)):
        raise ValueError("evaluation point outside [0, 1)^2")
    n = grid.n
    eps = grid.eps
    i = np.floor(x / eps).astype(int)
    j = np.floor(y / eps).astype(int)
    # x / eps can round across an integer; fix so that i eps <= x < (i+1) eps
    i = i + (x >= (i + 1) * eps) - (x < i * eps)
    j = j + (y >= (j + 1) * eps) - (y < j * eps)
    return x, y, np.clip(i, 0, n - 1), np.clip(j, 0, n - 1)


def pc_extension(grid: Grid, g) -> Callable:
    """Piecewise constant extension: g[i, j] on the cell [i eps, (i+1) eps) x [j eps, (j+1) eps)."""
    g = np.asarray(g, dtype=float)
    if g.shape != grid.shape:
        raise ValueError(f"g must have shape {grid.shape}")

    def ev(x, y):
        _, _, i, j = _cell_index(grid, x, y)
        return g[i, j]

    return ev


def pa_extension(grid: Grid, g) -> Callable:
    """Continuous piecewise affine extension on the lower/upper triangles of each cell.

    The last cell row and column reach past node n-1; there g is continued
    by its value at the last node.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != grid.shape:
        raise ValueError(f"g must have shape {grid.shape}")
    gp = np.pad(g, ((0, 1), (0, 1)), mode="edge")
    eps = grid.eps

    def ev(x, y):
        x, y, i, j = _cell_index(grid, x, y)
        xl = x - i * eps
        yl = y - j * eps
        lower = yl <= eps - xl
        g00, g10, g01, g11 = gp[i, j], gp[i + 1, j], gp[i, j + 1], gp[i + 1, j + 1]
        lo = g00 + (g10 - g00) / eps * xl + (g01 - g00) / eps * yl
        up = g11 + (g11 - g01) / eps * (xl - eps) + (g11 - g10) / eps * (yl - eps)
        return np.where(lower, lo, up)

    return ev


# ---------------------------------------------------------------- continuum fields

@dataclass
class ContinuumField:
    """Pair (w, z) on [0, 1]^2 with partial derivatives.

    ``partials`` maps names 'w_x', 'w_y', 'z_x', 'z_y' to callables; missing
    ones fall back to central differences with step 1e-5 (one sided at the
    edges of the square).
    """

    w: Callable
    z: Callable
    sigma: float = 1.0
    gamma: float = 1.0
    partials: dict = field(default_factory=dict)
    name: str = "field"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.gamma >= 0:
            raise ValueError("gamma must be nonnegative")

    def partial(self, comp: str, axis: int, x, y):
        key = f"{comp}_{'xy'[axis]}"
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if key in self.partials:
            return np.asarray(self.partials[key](x, y), dtype=float) * np.ones(np.broadcast(x, y).shape)
        f = self.w if comp == "w" else self.z
        h = FD_STEP
        if axis == 0:
            a, b = np.clip(x - h, 0, 1), np.clip(x + h, 0, 1)
            return (f(b, y) - f(a, y)) / (b - a)
        a, b = np.clip(y - h, 0, 1), np.clip(y + h, 0, 1)
        return (f(x, b) - f(x, a)) / (b - a)

    @classmethod
    def from_samples(cls, w_samples, z_samples, sigma=1.0, gamma=1.0, name="sampled"):
        """Bicubic interpolation of samples on a uniform grid covering [0, 1]^2."""
        from scipy.interpolate import RectBivariateSpline

        ws = np.asarray(w_samples, dtype=float)
        zs = np.asarray(z_samples, dtype=float)
        xs = np.linspace(0, 1, ws.shape[0])
        ys = np.linspace(0, 1, ws.shape[1])
        sw = RectBivariateSpline(xs, ys, ws, kx=3, ky=3)
        sz = RectBivariateSpline(xs, ys, zs, kx=3, ky=3)

        def mk(s, dx=0, dy=0):
            return lambda x, y: s.ev(np.asarray(x, float), np.asarray(y, float), dx=dx, dy=dy)

        parts = {"w_x": mk(sw, 1, 0), "w_y": mk(sw, 0, 1), "z_x": mk(sz, 1, 0), "z_y": mk(sz, 0, 1)}
        return cls(mk(sw), mk(sz), sigma, gamma, parts, name)


def shear_field(sigma=1.0, gamma=1.0) -> ContinuumField:
    """(w, z) = (y, x)."""
    return ContinuumField(
        lambda x, y: np.asarray(y, float) + 0 * np.asarray(x, float),
        lambda x, y: np.asarray(x, float) + 0 * np.asarray(y, float),
        sigma, gamma,
        {"w_x": lambda x, y: 0.0, "w_y": lambda x, y: 1.0,
         "z_x": lambda x, y: 1.0, "z_y": lambda x, y: 0.0},
        "shear",
    )


def flat_field(sigma=1.0, gamma=1.0) -> ContinuumField:
    zero = lambda x, y: np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    return ContinuumField(zero, zero, sigma, gamma,
                          {k: (lambda x, y: 0.0) for k in ("w_x", "w_y", "z_x", "z_y")}, "flat")


def domain_violation(f: ContinuumField, tol: float = DOMAIN_TOL) -> str | None:
    t = np.linspace(0.0, 1.0, TRACE_POINTS)
    zero = np.zeros_like(t)
    one = np.ones_like(t)
    if np.max(np.abs(f.z(zero, t))) > tol:
        return "z(0,·) ≠ 0"
    if np.max(np.abs(np.abs(f.z(t, zero)) - np.abs(f.z(t, one)))) > tol:
        return "|z(·,0)| ≠ |z(·,1)|"
    if np.max(np.abs(np.abs(f.w(zero, t)) - np.abs(f.w(one, t)))) > tol:
        return "|w(0,·)| ≠ |w(1,·)|"
    s = (np.arange(CURL_GRID) + 0.5) / CURL_GRID
    X, Y = np.meshgrid(s, s, indexing="ij")
    curl = f.partial("z", 0, X, Y) - f.partial("w", 1, X, Y)
    if np.max(np.abs(curl)) > tol:
        return "curl(w,z) ≠ 0"
    return None


def H_continuum(f: ContinuumField, resolution: int = 512) -> Renormalized:
    """(1/sigma) int (w^2-g^2)^2 + (z^2-1)^2 + sigma int (w_x)^2 + (z_y)^2 by the midpoint rule."""
    reason = domain_violation(f)
    if reason is not None:
        return Renormalized(math.inf, reason)
    s = (np.arange(resolution) + 0.5) / resolution
    X, Y = np.meshgrid(s, s, indexing="ij")
    w = f.w(X, Y) * np.ones_like(X)
    z = f.z(X, Y) * np.ones_like(X)
    bulk = np.mean((w**2 - f.gamma**2) ** 2 + (z**2 - 1) ** 2)
    grad = np.mean(f.partial("w", 0, X, Y) ** 2 + f.partial("z", 1, X, Y) ** 2)
    return Renormalized(float(bulk / f.sigma + f.sigma * grad))


# ---------------------------------------------------------------- Gamma schedule

@dataclass(frozen=True)
class GammaLevel:
    n: int
    eps: float
    delta_hor: float
    delta_ver: float

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.delta_hor, self.delta_ver)


@dataclass(frozen=True)
class GammaSchedule:
    levels: tuple
    sigma: float
    gamma: float
    rtol: float = 0.01

    def __post_init__(self):
        if not self.levels:
            raise ValueError("schedule needs at least one level")
        eps = [lv.eps for lv in self.levels]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps must be strictly decreasing along the schedule")
        last = self.levels[-1]
        s = last.eps / math.sqrt(2 * last.delta_ver)
        g2 = last.delta_hor / last.delta_ver
        if abs(s / self.sigma - 1) > self.rtol:
            raise ValueError(f"eps/sqrt(2 delta_ver) = {s:.6g} at the finest level, target sigma = {self.sigma:.6g}")
        if abs(g2 - self.gamma**2) > self.rtol * max(self.gamma**2, 1e-300):
            raise ValueError(f"delta_hor/delta_ver = {g2:.6g} at the finest level, target gamma^2 = {self.gamma**2:.6g}")

    @classmethod
    def dyadic(cls, ns, sigma: float = 1.0, gamma: float = 1.0) -> "GammaSchedule":
        """eps_n = 2^-n, delta_ver = eps^2 / (2 sigma^2), delta_hor = gamma^2 delta_ver."""
        lv = []
        for n in ns:
            e = 2.0 ** (-n)
            dv = e * e / (2 * sigma * sigma)
            lv.append(GammaLevel(int(n), e, gamma * gamma * dv, dv))
        return cls(tuple(lv), sigma, gamma)


# ---------------------------------------------------------------- recovery

def recovery_angles(f: ContinuumField, grid: Grid, delta_ver: float) -> AngularField:
    """Curl-free angle field whose horizontal chirality samples w.

    The last bond column samples w(1, .) so that the horizontal periodicity
    condition inherits |w(0,.)| = |w(1,.)| exactly.  Vertical angles telescope
    the horizontal ones, which makes the field curl free with theta_ver(0,.)=0.
    """
    n, eps = grid.n, grid.eps
    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    X = np.where(I >= n - 2, 1.0, I * eps)
    Y = J * eps
    wt = np.asarray(f.w(X, Y), dtype=float) * np.ones((n, n))
    zs = np.asarray(f.z(I * eps, np.where(J >= n - 2, 1.0, Y)), dtype=float)
    c = math.sqrt(delta_ver / 2)
    amp = c * max(np.max(np.abs(wt)), np.max(np.abs(zs)))
    if amp > 1:
        raise ValueError(f"lift not admissible: sqrt(delta_ver/2) max(|w|,|z|) = {amp:.6g} > 1")
    phi_h = 2 * np.arcsin(c * wt)
    th = phi_h[:-1, :]
    tv = np.zeros((n, n - 1))
    tv[1:, :] = np.cumsum(th[:, 1:] - th[:, :-1], axis=0)
    if np.max(np.abs(tv)) >= math.pi / 2:
        raise ValueError(f"level too coarse: max |theta_ver| = {np.max(np.abs(tv)):.6g} >= pi/2")
    return AngularField(grid, th, tv)


def recovery_sequence(f: ContinuumField, eps: float, delta_hor: float, delta_ver: float) -> SpinField:
    grid = make_grid(eps)
    return spins_from_angles(recovery_angles(f, grid, delta_ver), (0.0, 1.0))


@dataclass
class GammaRow:
    n: int
    eps: float
    delta_ver: float
    H_n: float
    H: float
    gap: float
    reason: str | None = None
    H_n_raw: float = math.nan  # E/(sqrt(2) eps delta_ver^1.5) ignoring the periodicity sentinel
    periodicity: float = math.nan


def gamma_experiment(f: ContinuumField, schedule: GammaSchedule, resolution: int = 512) -> list[GammaRow]:
    Hv = H_continuum(f, resolution)
    if not Hv.finite:
        raise ValueError(f"field not in the domain of H: {Hv.reason}")
    rows = []
    for lv in schedule.levels:
        u = recovery_sequence(f, lv.eps, lv.delta_hor, lv.delta_ver)
        p = lv.params
        hn = renormalized_Hn(u, p)
        raw = energy_direct(u, p).total / (math.sqrt(2.0) * lv.eps * lv.delta_ver**1.5)
        gap = abs(hn.value - Hv.value) if hn.finite else math.inf
        rows.append(GammaRow(lv.n, lv.eps, lv.delta_ver, hn.value, Hv.value, gap, hn.reason,
                             raw, periodicity_violation(u)))
    rows.sort(key=lambda r: r.n)
    return rows
