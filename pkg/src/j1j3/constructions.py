"""Explicit competitor spin fields: ferromagnet, optimal helices, mollified
self-similar branching and boundary vortex structures, plus periodic variants.

The branching field is built from its potential.  The piecewise constant angle
table (values in {-theta, 0, theta}) is the lattice gradient of a piecewise
linear phase; mollifying the phase and differencing on the lattice gives an
angle field that is curl free to rounding for every eps and lambda, and whose
column 0 carries no vertical rotation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import (
    AngularField,
    Grid,
    ModelParams,
    SpinField,
    angles_from_spins,
    plaquette_curl,
    spins_from_angles,
    wrap_angle,
)
from .topology import vortices

CURL_FREE_TOL = 1e-9


# ---------------------------------------------------------------- simple fields

def ferromagnet(grid: Grid) -> SpinField:
    return SpinField.from_phi(grid, np.zeros(grid.shape))


def helix(grid: Grid, p: ModelParams, sign_hor: int = 1, sign_ver: int = 1) -> SpinField:
    if sign_hor not in (1, -1) or sign_ver not in (1, -1):
        raise ValueError("signs must be +1 or -1")
    i = np.arange(grid.n)[:, None]
    j = np.arange(grid.n)[None, :]
    phi = sign_hor * p.theta_opt_hor * i + sign_ver * p.theta_opt_ver * j
    return SpinField.from_phi(grid, phi)


# ---------------------------------------------------------------- mollifier

_BUMP_MASS = None


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1
    out[m] = np.exp(-1.0 / (1.0 - t[m] ** 2))
    return out


def _bump_mass() -> float:
    global _BUMP_MASS
    if _BUMP_MASS is None:
        from scipy.integrate import quad

        _BUMP_MASS = quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), -1, 1, epsabs=1e-14, epsrel=1e-14)[0]
    return _BUMP_MASS


@dataclass(frozen=True)
class MollifierKernel:
    """Normalized bump c exp(-1/(1-(x/lam)^2)) on (-lam, lam) with Gauss-Legendre rule."""

    lam: float
    n_nodes: int = 32

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def density(self, x):
        return _bump(np.asarray(x) / self.lam) / (self.lam * _bump_mass())

    def derivative(self, x):
        t = np.asarray(x, dtype=float) / self.lam
        out = np.zeros_like(t)
        m = np.abs(t) < 1
        tm = t[m]
        out[m] = np.exp(-1.0 / (1.0 - tm**2)) * (-2 * tm / (1 - tm**2) ** 2)
        return out / (self.lam**2 * _bump_mass())

    @property
    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes s_k in (-lam, lam) and weights w_k with sum w_k g(s_k) ~ int p(s) g(s) ds."""
        t, w = np.polynomial.legendre.leggauss(self.n_nodes)
        s = self.lam * t
        wk = w * self.lam * self.density(s)
        # the raw rule misses the bump mass by ~1e-8 at 32 nodes; renormalizing
        # makes constants exact and keeps the result inside the range of f
        return s, wk / np.sum(wk)

    def mass(self) -> float:
        from scipy.integrate import quad

        return quad(lambda x: float(self.density(np.array([x]))[0]), -self.lam, self.lam,
                    epsabs=1e-13, epsrel=1e-13)[0]

    def abs_derivative_integral(self) -> float:
        # p is unimodal and even, so int |p'| = 2 p(0); checked against quadrature in tests
        return 2.0 * float(self.density(np.array([0.0]))[0])


def mollify_1d(kernel: MollifierKernel, f, x, breaks=None) -> np.ndarray:
    """(f * p_lam)(x) by Gauss-Legendre quadrature; ``f`` is a vectorized callable.

    ``breaks`` lists points where f jumps or kinks.  The window (x - lam, x + lam)
    is then split there and each piece gets its own rule, which keeps the
    spectral accuracy of Gauss-Legendre on piecewise smooth f.
    """
    x = np.asarray(x, dtype=float)
    if breaks is None or len(breaks) == 0:
        s, w = kernel.rule
        vals = f(x[..., None] - s)
        return np.sum(vals * w, axis=-1)
    lam = kernel.lam
    t, wt = np.polynomial.legendre.leggauss(kernel.n_nodes)
    b = np.sort(np.asarray(breaks, dtype=float))
    flat = x.ravel()
    out = np.empty_like(flat)
    # shared normalization so that the split rule also integrates p to 1
    for k, xk in enumerate(flat):
        # in the variable s of f(xk - s), breaks sit at xk - b
        cuts = xk - b
        cuts = cuts[(cuts > -lam) & (cuts < lam)]
        edges = np.concatenate([[-lam], np.sort(cuts), [lam]])
        acc = mass = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            half = 0.5 * (hi - lo)
            sk = 0.5 * (hi + lo) + half * t
            wk = wt * half * kernel.density(sk)
            acc += float(np.sum(wk * f(xk - sk)))
            mass += float(np.sum(wk))
        out[k] = acc / mass
    return out.reshape(x.shape)


# ---------------------------------------------------------------- branching

@dataclass(frozen=True)
class BranchingSpec:
    N: int
    lam: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be an integer >= 1")
        if not (0.0 < self.lam < 2.0 ** (-self.N)):
            raise ValueError(f"lambda must lie in (0, 2^-N) = (0, {2.0 ** -self.N:g}), got {self.lam!r}")

    @classmethod
    def default(cls, eps: float, delta: float) -> "BranchingSpec":
        r = eps / math.sqrt(delta)
        N = max(1, math.ceil(abs(math.log(r) / math.log(2))))
        return cls(N, eps / (2 * math.sqrt(delta)))


def _tri(y, period):
    """Distance from y to the nearest multiple of ``period``."""
    r = np.mod(y, period)
    return np.minimum(r, period - r)


def branching_potential(x, y, N: int, x_flat: float | None = None):
    """Piecewise linear phase (in units of theta/eps per length) whose gradient is the table.

    Zero for x <= 0, a wedge boundary layer on [0, 2^-N], dyadic bands
    [2^-k-2, 2^-k-1) for k = 0..N-2, and tri(y) - x for x >= 1/2.  If
    ``x_flat`` is given, the field is frozen in x beyond it (no horizontal
    rotation), which is the transition layer of the periodic variant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    if x_flat is not None:
        x = np.minimum(x, x_flat)
    h = 2.0**-N
    out = np.zeros(x.shape)
    m = (x > 0) & (x < h)
    out[m] = np.minimum(0.0, _tri(y[m], 2 * h) - x[m])
    for k in range(N - 1):
        lo, hi = 2.0 ** (-k - 2), 2.0 ** (-k - 1)
        m = (x >= lo) & (x < hi)
        out[m] = -np.abs(_tri(y[m], 2.0**-k) - x[m])
    m = x >= 0.5
    out[m] = _tri(y[m], 1.0) - x[m]
    return out


def branching_table(x, y, N: int):
    """Piecewise constant angle table (Psi_hor, Psi_ver) / theta, values in {-1, 0, 1}.

    Boundary ties follow the one-sided convention of the lattice gradient
    (value of the region to the upper right of the point).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    d = 1e-9
    hh = (branching_potential(x + d, y, N) - branching_potential(x - d, y, N)) / (2 * d)
    vv = (branching_potential(x, y + d, N) - branching_potential(x, y - d, N)) / (2 * d)
    return np.round(hh), np.round(vv)


def _mollified_potential(X, Y, N, kernel: MollifierKernel, shift: float, x_flat=None, chunk=4096):
    s, w = kernel.rule
    S, T = np.meshgrid(s, s, indexing="ij")
    W = np.outer(w, w).ravel()
    S, T = S.ravel(), T.ravel()
    xf, yf = X.ravel(), Y.ravel()
    out = np.empty(xf.shape)
    for a in range(0, xf.size, chunk):
        xa = xf[a:a + chunk, None] - shift - S
        ya = yf[a:a + chunk, None] - T
        out[a:a + chunk] = branching_potential(xa, ya, N, x_flat) @ W
    return out.reshape(X.shape)


def _angles_from_phase(grid: Grid, phi: np.ndarray) -> AngularField:
    return AngularField(grid, wrap_angle(np.diff(phi, axis=0)), wrap_angle(np.diff(phi, axis=1)))


def _check_branching(theta: AngularField):
    c = plaquette_curl(theta.theta_hor, theta.theta_ver)
    if c.size and np.max(np.abs(c)) > CURL_FREE_TOL:
        i, j = np.unravel_index(np.argmax(np.abs(c)), c.shape)
        raise RuntimeError(f"branching field not curl free at plaquette ({i}, {j}): {c[i, j]:.3e}")
    if np.max(np.abs(theta.theta_ver[0, :])) > CURL_FREE_TOL:
        raise RuntimeError("branching field rotates vertically on column 0")


def branching_angles(grid: Grid, p: ModelParams, spec: BranchingSpec | None = None,
                     *, periodic: bool = False, n_nodes: int = 32) -> AngularField:
    delta = p.isotropic_delta
    if spec is None:
        spec = BranchingSpec.default(grid.eps, delta)
    theta = p.theta_opt_hor
    eps = grid.eps
    kernel = MollifierKernel(spec.lam, n_nodes)
    n = grid.n
    x = grid.coords
    if periodic:
        # columns 0, 1 and n-2, n-1 are flat after mollification, so the
        # first and last horizontal bonds both vanish
        shift = spec.lam + eps
        x_flat = (n - 2) * eps - shift - spec.lam
        if x_flat <= 0.5:
            raise ValueError("grid too coarse for the periodic transition layer")
        # rows above the midline are mirrored from below
        half = (n - 1) // 2 + 1
        X, Y = np.meshgrid(x, x[:half], indexing="ij")
        low = _mollified_potential(X, Y, spec.N, kernel, shift, x_flat)
        pot = _mirror_rows(low, n)
    else:
        X, Y = np.meshgrid(x, x, indexing="ij")
        pot = _mollified_potential(X, Y, spec.N, kernel, spec.lam)
    phi = (theta / eps) * pot
    ang = _angles_from_phase(grid, phi)
    _check_branching(ang)
    return ang


def _mirror_rows(low: np.ndarray, n: int) -> np.ndarray:
    """Extend columns j < half to all j with row n-1-j equal to row j."""
    j = np.arange(n)
    src = np.minimum(j, n - 1 - j)
    return low[:, src]


def branching(grid: Grid, p: ModelParams, spec: BranchingSpec | None = None, *, n_nodes: int = 32) -> SpinField:
    ang = branching_angles(grid, p, spec, n_nodes=n_nodes)
    return spins_from_angles(ang, (0.0, 1.0))


def branching_periodic(grid: Grid, p: ModelParams, spec: BranchingSpec | None = None, *, n_nodes: int = 32) -> SpinField:
    ang = branching_angles(grid, p, spec, periodic=True, n_nodes=n_nodes)
    return spins_from_angles(ang, (0.0, 1.0))


# ---------------------------------------------------------------- vortices

def vortex_block_size(delta: float) -> int:
    M = int(math.floor(math.pi / math.acos(1.0 - delta)))
    return M


def _vortex_phase(n: int, M: int, theta: float) -> np.ndarray:
    """Absolute phase lift for the boundary vortex strip; one winding per 2M rows.

    Lower half of a block (local rows 0..M): phase i pi/j above the diagonal and
    2 pi - j pi/i below it, so each row turns by pi before the diagonal.  Upper
    half: no rotation near the wall, helix beyond the diagonal i = j - M.  The
    strip's far side and the bulk turn vertically by -pi/M per row so that one
    2 pi slip per block closes the period exactly.
    """
    tau = math.pi / M
    i = np.arange(n)[:, None] * np.ones((1, n))
    j = np.ones((n, 1)) * np.arange(n)[None, :]
    jl = np.mod(j, 2 * M)
    phi = np.zeros((n, n))
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(i <= jl, i * math.pi / jl, 2 * math.pi - jl * math.pi / i)
    lower = np.where(i == 0, 0.0, lower)
    upper = np.maximum(0.0, i - (jl - M)) * tau
    strip = np.where(jl <= M, lower, upper)
    bulk = (i - M) * theta - j * tau
    phi = np.where(i <= M, strip, bulk)
    # regularize the core plaquette (0, 0) of each block: spins at (1, 0) and
    # (1, 1) set to -2pi/3 and 2pi/3 so the winding sits on one plaquette
    # without antipodal neighbours
    rows = np.arange(0, n, 2 * M)
    phi[1, rows] = -2 * math.pi / 3
    r1 = rows + 1
    r1 = r1[r1 < n]
    phi[1, r1] = 2 * math.pi / 3
    return phi


def _nnn_energy_phase(phi, c, periodic_j: bool):
    """Sum of squared next-nearest-neighbour residuals (halved) and its phase gradient."""
    s = np.stack([-np.sin(phi), np.cos(phi)], -1)
    G = np.zeros_like(s)
    rh = s[:-2] - 2 * c * s[1:-1] + s[2:]
    G[:-2] += rh
    G[1:-1] -= 2 * c * rh
    G[2:] += rh
    if periodic_j:
        sm, sp = np.roll(s, 1, axis=1), np.roll(s, -1, axis=1)
        rv = sm - 2 * c * s + sp
        G += np.roll(rv, -1, axis=1) - 2 * c * rv + np.roll(rv, 1, axis=1)
    else:
        rv = s[:, :-2] - 2 * c * s[:, 1:-1] + s[:, 2:]
        G[:, :-2] += rv
        G[:, 1:-1] -= 2 * c * rv
        G[:, 2:] += rv
    E = 0.5 * (np.sum(rh * rh) + np.sum(rv * rv))
    gphi = -G[..., 0] * np.cos(phi) - G[..., 1] * np.sin(phi)
    return E, gphi


@lru_cache(maxsize=32)
def _relaxed_vortex_cell(M: int, delta: float):
    """Relax one period (2M rows) of the vortex strip with column 0 and the far field fixed.

    Returns phases of shape (L, 2M); columns i >= L follow the far field.
    Deterministic: L-BFGS from the explicit block design.
    """
    from scipy.optimize import minimize

    theta = math.acos(1.0 - delta)
    L = 2 * M + 4
    width = L + 2
    base = _vortex_phase(max(width, 2 * M + 2), M, theta)[:width, : 2 * M]
    # unwrap rows of the seed so the periodic cell is smooth mod 2 pi in j
    free = np.zeros(base.shape, dtype=bool)
    free[1:L, :] = True
    c = 1.0 - delta

    def f(x):
        phi = base.copy()
        phi[free] = x
        E, g = _nnn_energy_phase(phi, c, True)
        return E, g[free]

    res = minimize(f, base[free], jac=True, method="L-BFGS-B",
                   options={"maxiter": 20000, "gtol": 1e-12, "ftol": 1e-15})
    phi = base.copy()
    phi[free] = res.x
    return phi[:L]


def _vortex_phase_relaxed(n: int, M: int, delta: float) -> np.ndarray:
    theta = math.acos(1.0 - delta)
    phi = _vortex_phase(n, M, theta)
    cell = _relaxed_vortex_cell(M, float(delta))
    L = min(cell.shape[0], n)
    jl = np.mod(np.arange(n), 2 * M)
    phi[:L, :] = cell[:L, jl]
    return phi


def vortex_angles(grid: Grid, p: ModelParams, relax: bool = True) -> AngularField:
    delta = p.isotropic_delta
    theta = p.theta_opt_hor
    M = vortex_block_size(delta)
    if M < 2:
        raise ValueError(f"vortex construction needs floor(pi/theta_opt) >= 2, got M={M}")
    if M * grid.eps >= 1:
        raise ValueError(f"vortex strip M*eps = {M * grid.eps:g} does not fit in the domain")
    phi = _vortex_phase_relaxed(grid.n, M, delta) if relax else _vortex_phase(grid.n, M, theta)
    return _angles_from_phase(grid, phi)


def _cell_vortex(M: int, delta: float, relax: bool) -> tuple[int, int]:
    """Plaquette (i, r) of the single vortex in one 2M-row period of the strip."""
    theta = math.acos(1.0 - delta)
    if relax:
        cell = _relaxed_vortex_cell(M, float(delta))
    else:
        cell = _vortex_phase(4 * M, M, theta)[: 2 * M + 4, : 2 * M]
    ph = cell[:, np.r_[0:2 * M, 0]]
    th = wrap_angle(np.diff(ph, axis=0))
    tv = wrap_angle(np.diff(ph, axis=1))
    k = np.round(plaquette_curl(th, tv) / (2 * math.pi)).astype(int)
    idx = np.argwhere(k != 0)
    if len(idx) != 1:
        raise RuntimeError(f"vortex cell carries {len(idx)} vortices, expected one")
    return int(idx[0, 0]), int(idx[0, 1])


def expected_vortex_plaquettes(grid: Grid, M: int, delta: float, relax: bool = True) -> list[tuple[int, int]]:
    """Designed vortex locations: one plaquette per 2M-row block along the wall."""
    i0, r0 = _cell_vortex(M, delta, relax)
    return [(i0, r) for r in range(r0, grid.n - 1, 2 * M)]


def designed_vortex_count(grid: Grid, p: ModelParams, relax: bool = True) -> int:
    d = p.isotropic_delta
    return len(expected_vortex_plaquettes(grid, vortex_block_size(d), d, relax))


def _check_vortex(ang: AngularField, grid: Grid, M: int, delta: float, relax: bool):
    vs = vortices(ang)
    got = sorted((i, j) for i, j, _ in vs.plaquettes)
    want = expected_vortex_plaquettes(grid, M, delta, relax)
    if got != want:
        raise RuntimeError(f"vortex construction produced vortices at {got[:5]}..., expected {want[:5]}...")
    if np.max(np.abs(ang.theta_ver[0, :])) > 0:
        raise RuntimeError("vortex field rotates vertically on column 0")
    return vs


def vortex_competitor(grid: Grid, p: ModelParams, relax: bool = True) -> SpinField:
    """Boundary vortex strip of width about M = floor(pi/theta_opt) along x = 0.

    One vortex of winding -1 per 2M rows, helix (theta_opt, -pi/M) beyond the
    strip.  With ``relax`` the strip is a deterministic energy relaxation of
    one period of the explicit block design, tiled along the wall.
    """
    delta = p.isotropic_delta
    ang = vortex_angles(grid, p, relax)
    _check_vortex(ang, grid, vortex_block_size(delta), delta, relax)
    return spins_from_angles(ang, (0.0, 1.0))


def vortex_periodic(grid: Grid, p: ModelParams, relax: bool = True) -> SpinField:
    """Vortex strip with reversed orientation on the lower left quarter, mirrored in x and y.

    Mirroring the spins about the centre index (n-1)/2 in each direction makes
    the first and last bonds of every row and column identical, so the
    periodicity condition holds exactly; mirrored plaquettes carry opposite curl.
    """
    delta = p.isotropic_delta
    M = vortex_block_size(delta)
    if M < 2:
        raise ValueError(f"vortex construction needs floor(pi/theta_opt) >= 2, got M={M}")
    n = grid.n
    if M * grid.eps >= 0.5:
        raise ValueError("vortex strip does not fit in half the domain")
    if relax:
        phi = -_vortex_phase_relaxed(n, M, delta)
    else:
        phi = -_vortex_phase(n, M, p.theta_opt_hor)
    src = np.minimum(np.arange(n), n - 1 - np.arange(n))
    return SpinField.from_phi(grid, phi[src][:, src])
