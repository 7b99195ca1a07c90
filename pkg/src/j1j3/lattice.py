"""Square lattice geometry, spin fields, bond angles and chirality parameters.

Arrays are indexed ``[i, j]`` with ``i`` the horizontal (x) node index and
``j`` the vertical (y) node index, so node ``(i, j)`` sits at ``(i*eps, j*eps)``.

Shapes for a grid with ``n`` nodes per side:

* spins: ``(n, n, 2)``
* theta_hor: ``(n - 1, n)``, the bond from ``(i, j)`` to ``(i + 1, j)``
* theta_ver: ``(n, n - 1)``, the bond from ``(i, j)`` to ``(i, j + 1)``
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
CURL_TOL = 1e-9


def node_count(eps: float) -> int:
    """Number of i >= 0 with i*eps < 1."""
    n = int(np.ceil(1.0 / eps))
    # guard the rounding of 1/eps near integers
    while n * eps < 1.0:
        n += 1
    while n > 1 and (n - 1) * eps >= 1.0:
        n -= 1
    return n


@dataclass(frozen=True)
class Grid:
    eps: float
    n: int

    def __post_init__(self):
        if not (0.0 < self.eps < 0.5):
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps!r}")
        if self.n != node_count(self.eps):
            raise ValueError(f"n={self.n} inconsistent with eps={self.eps!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def coords(self) -> np.ndarray:
        return self.eps * np.arange(self.n)

    def index_set(self, name: str) -> np.ndarray:
        """Index pairs of one of I, N_hor, N_ver, NN_hor, NN_ver as an (m, 2) array."""
        n = self.n
        ni, nj = {
            "I": (n, n),
            "N_hor": (n - 1, n),
            "N_ver": (n, n - 1),
            "NN_hor": (max(n - 2, 0), n),
            "NN_ver": (n, max(n - 2, 0)),
        }[name]
        ii, jj = np.meshgrid(np.arange(ni), np.arange(nj), indexing="ij")
        return np.stack([ii.ravel(), jj.ravel()], axis=1)


def make_grid(eps: float) -> Grid:
    eps = float(eps)
    if not (0.0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps!r}")
    return Grid(eps, node_count(eps))


@dataclass(frozen=True)
class ModelParams:
    delta_hor: float
    delta_ver: float

    def __post_init__(self):
        for name in ("delta_hor", "delta_ver"):
            d = getattr(self, name)
            if not (0.0 < d < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {d!r}")

    @classmethod
    def isotropic(cls, delta: float) -> "ModelParams":
        return cls(float(delta), float(delta))

    @property
    def isotropic_delta(self) -> float:
        if self.delta_hor != self.delta_ver:
            raise ValueError("operation requires delta_hor == delta_ver")
        return self.delta_hor

    @property
    def gamma(self) -> float:
        return float(np.sqrt(self.delta_hor / self.delta_ver))

    @property
    def theta_opt_hor(self) -> float:
        return float(np.arccos(1.0 - self.delta_hor))

    @property
    def theta_opt_ver(self) -> float:
        return float(np.arccos(1.0 - self.delta_ver))


def rot(theta) -> np.ndarray:
    """Rotation matrices, shape (..., 2, 2)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def rotate(v, theta) -> np.ndarray:
    """Rotate 2-vectors ``v`` (shape (..., 2)) counterclockwise by ``theta``."""
    v = np.asarray(v, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c * v[..., 0] - s * v[..., 1], s * v[..., 0] + c * v[..., 1]], -1)


def cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def signed_angle(a, b) -> np.ndarray:
    """Oriented angle from a to b in [-pi, pi), with sign(0) = -1."""
    # same value as sign(cross) * arccos(dot), but atan2 keeps full precision
    # for nearly aligned pairs where arccos loses half the digits
    dot = np.sum(a * b, axis=-1)
    cr = cross(a, b)
    ang = np.arctan2(np.abs(cr), dot)
    ang = np.where(cr > 0, ang, -ang)
    # antiparallel pairs go to -pi; aligned pairs to +0
    return ang + 0.0


@dataclass(frozen=True, eq=False)
class SpinField:
    grid: Grid
    spins: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.spins, dtype=float)
        if s.shape != (self.grid.n, self.grid.n, 2):
            raise ValueError(f"spins must have shape {(self.grid.n, self.grid.n, 2)}, got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "spins", s)

    def norm_error(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.spins, axis=-1) - 1.0)))

    def check_norms(self, tol: float = NORM_TOL):
        err = self.norm_error()
        if err > tol:
            raise ValueError(f"spins are not unit vectors (max deviation {err:.3e})")

    @classmethod
    def from_phi(cls, grid: Grid, phi) -> "SpinField":
        """u = Rot(phi) (0, 1)."""
        phi = np.asarray(phi, dtype=float)
        # 0.0 - sin keeps +0.0 where phi = 0, so the boundary spin is bit-exact
        return cls(grid, np.stack([0.0 - np.sin(phi), np.cos(phi)], -1))


@dataclass(frozen=True, eq=False)
class AngularField:
    grid: Grid
    theta_hor: np.ndarray
    theta_ver: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        th = np.asarray(self.theta_hor, dtype=float)
        tv = np.asarray(self.theta_ver, dtype=float)
        if th.shape != (n - 1, n) or tv.shape != (n, n - 1):
            raise ValueError(f"bad angle shapes {th.shape}, {tv.shape} for n={n}")
        th.setflags(write=False)
        tv.setflags(write=False)
        object.__setattr__(self, "theta_hor", th)
        object.__setattr__(self, "theta_ver", tv)

    def in_range(self) -> bool:
        return bool(
            np.all((self.theta_hor >= -np.pi) & (self.theta_hor < np.pi))
            and np.all((self.theta_ver >= -np.pi) & (self.theta_ver < np.pi))
        )

    @classmethod
    def constant(cls, grid: Grid, a: float, b: float) -> "AngularField":
        n = grid.n
        return cls(grid, np.full((n - 1, n), float(a)), np.full((n, n - 1), float(b)))


@dataclass(frozen=True, eq=False)
class ChiralityField:
    grid: Grid
    w: np.ndarray
    z: np.ndarray
    gamma: float = 1.0

    @property
    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        """The map (gamma*w, z)."""
        return self.gamma * self.w, self.z


def wrap_angle(theta):
    """Map to [-pi, pi)."""
    return (np.asarray(theta, dtype=float) + np.pi) % (2 * np.pi) - np.pi


def angles_from_spins(u: SpinField) -> AngularField:
    s = u.spins
    th = signed_angle(s[:-1, :], s[1:, :])
    tv = signed_angle(s[:, :-1], s[:, 1:])
    return AngularField(u.grid, th, tv)


def plaquette_curl(theta_hor: np.ndarray, theta_ver: np.ndarray) -> np.ndarray:
    """eps * curl on plaquettes (i, j), i, j <= n - 2."""
    return theta_ver[1:, :] - theta_ver[:-1, :] - theta_hor[:, 1:] + theta_hor[:, :-1]


def check_quantized(curl: np.ndarray, tol: float = CURL_TOL):
    """Raise if some plaquette value is not within tol of {-2pi, 0, 2pi}."""
    k = np.round(curl / (2 * np.pi))
    bad = (np.abs(curl - 2 * np.pi * k) > tol) | (np.abs(k) > 1)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"curl condition violated at plaquette ({i}, {j}): eps*curl = {curl[i, j]:.12g}"
        )


def spins_from_angles(theta: AngularField, seed=(0.0, 1.0)) -> SpinField:
    """Rebuild spins from bond angles: column 0 via theta_ver, then each row via theta_hor."""
    check_quantized(plaquette_curl(theta.theta_hor, theta.theta_ver))
    seed = np.asarray(seed, dtype=float)
    if abs(np.linalg.norm(seed) - 1.0) > NORM_TOL:
        raise ValueError("seed must be a unit vector")
    n = theta.grid.n
    phi = np.zeros((n, n))
    phi[0, 1:] = np.cumsum(theta.theta_ver[0, :])
    phi[1:, :] = phi[0, :] + np.cumsum(theta.theta_hor, axis=0)
    spins = rotate(seed, phi)
    return SpinField(theta.grid, spins)


def chirality_from_angles(theta: AngularField, p: ModelParams) -> ChiralityField:
    w = np.sqrt(2.0 / p.delta_hor) * np.sin(theta.theta_hor / 2)
    z = np.sqrt(2.0 / p.delta_ver) * np.sin(theta.theta_ver / 2)
    return ChiralityField(theta.grid, w, z, p.gamma)
