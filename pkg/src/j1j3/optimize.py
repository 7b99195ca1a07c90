"""Local minimization of the lattice energy in absolute angles.

u_{i,j} = Rot(phi_{i,j}) (0, 1), so with a = phi_{i+1} - phi_i and
b = phi_{i+2} - phi_{i+1} each next-nearest-neighbour summand is
2 + 4c^2 - 4c cos a - 4c cos b + 2 cos(a + b) with c = 1 - delta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import boundary_violation, BC_TOL
from .lattice import Grid, ModelParams, SpinField

METHODS = ("gd", "anneal")


@dataclass(eq=False)
class AngleState:
    grid: Grid
    phi: np.ndarray
    frozen: np.ndarray | None = None

    def __post_init__(self):
        self.phi = np.array(self.phi, dtype=float)
        if self.phi.shape != self.grid.shape:
            raise ValueError(f"phi must have shape {self.grid.shape}")
        if not np.all(np.isfinite(self.phi)):
            raise ValueError("phi must be finite")
        if self.frozen is None:
            self.frozen = np.zeros(self.grid.shape, dtype=bool)
            self.frozen[0, :] = True
        self.frozen = np.asarray(self.frozen, dtype=bool)

    @classmethod
    def from_spins(cls, u: SpinField, freeze_boundary: bool = True) -> "AngleState":
        s = u.spins
        phi = np.arctan2(-s[..., 0], s[..., 1])
        st = cls(u.grid, phi)
        if freeze_boundary:
            st.phi[0, :] = 0.0
        else:
            st.frozen[:] = False
        return st

    def to_spins(self) -> SpinField:
        return SpinField.from_phi(self.grid, self.phi)


@dataclass
class OptimizeOptions:
    method: str = "gd"
    max_iter: int = 2000
    tol: float = 1e-12         # stop when max |grad| drops below tol
    step0: float | None = None  # initial trial step; default 1/(16 eps^2)
    armijo_c: float = 1e-4
    shrink: float = 0.5
    seed: int = 0
    anneal_a0: float = math.pi / 4
    anneal_r: float = 0.5
    anneal_rounds: int = 5
    periodic_weight: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if not (self.tol > 0 and self.max_iter >= 0):
            raise ValueError("tolerance must be positive and max_iter nonnegative")
        if self.periodic_weight < 0:
            raise ValueError("periodic penalty weight must be >= 0")
        if not (0 < self.shrink < 1 and 0 < self.armijo_c < 1):
            raise ValueError("line search parameters out of range")


@dataclass
class TraceRow:
    iter: int
    energy: float
    grad_norm: float


@dataclass
class Trace:
    rows: list = field(default_factory=list)
    final_grad_norm: float = math.nan

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def _dir_terms(phi, c, axis):
    a = np.diff(phi, axis=axis)
    if axis == 0:
        A, B = a[:-1, :], a[1:, :]
    else:
        A, B = a[:, :-1], a[:, 1:]
    return A, B


def _energy_grad(phi, p: ModelParams, eps: float, want_grad=True):
    E = 0.0
    G = np.zeros_like(phi) if want_grad else None
    for axis, d in ((0, p.delta_hor), (1, p.delta_ver)):
        c = 1.0 - d
        if phi.shape[axis] < 3:
            continue
        A, B = _dir_terms(phi, c, axis)
        term = 2 + 4 * c * c - 4 * c * np.cos(A) - 4 * c * np.cos(B) + 2 * np.cos(A + B)
        E += float(np.sum(term))
        if want_grad:
            s2 = np.sin(A + B)
            dA = 4 * c * np.sin(A) - 2 * s2
            dB = 4 * c * np.sin(B) - 2 * s2
            # A = phi[k+1] - phi[k], B = phi[k+2] - phi[k+1]
            ga = np.zeros_like(phi)
            if axis == 0:
                ga[:-2] -= dA
                ga[1:-1] += dA - dB
                ga[2:] += dB
            else:
                ga[:, :-2] -= dA
                ga[:, 1:-1] += dA - dB
                ga[:, 2:] += dB
            G += ga
    scale = eps * eps / 2
    return E * scale, (G * scale if want_grad else None)


def _periodic_penalty(phi, weight):
    if weight == 0:
        return 0.0, np.zeros_like(phi)
    G = np.zeros_like(phi)
    P = 0.0
    for axis in (0, 1):
        x = np.moveaxis(phi, axis, 0)
        g = np.moveaxis(G, axis, 0)
        a0 = x[1] - x[0]
        a1 = x[-1] - x[-2]
        v = np.cos(a0) - np.cos(a1)
        P += float(np.sum(v * v))
        # d/dphi of v^2
        t0 = 2 * v * np.sin(a0)
        t1 = 2 * v * np.sin(a1)
        g[1] -= t0
        g[0] += t0
        g[-1] += t1
        g[-2] -= t1
    return weight * P, weight * G


def energy_of_angles(s: AngleState, p: ModelParams) -> float:
    return _energy_grad(s.phi, p, s.grid.eps, want_grad=False)[0]


def energy_grad(s: AngleState, p: ModelParams) -> np.ndarray:
    g = _energy_grad(s.phi, p, s.grid.eps)[1]
    g[s.frozen] = 0.0
    return g


def _objective(phi, frozen, p, eps, weight):
    E, G = _energy_grad(phi, p, eps)
    if weight:
        P, GP = _periodic_penalty(phi, weight)
        E += P
        G += GP
    G[frozen] = 0.0
    return E, G


def _descend(phi, frozen, p, eps, opts: OptimizeOptions, trace: Trace, it0: int):
    f, g = _objective(phi, frozen, p, eps, opts.periodic_weight)
    t = opts.step0 if opts.step0 is not None else 1.0 / (16.0 * eps * eps)
    gn = float(np.max(np.abs(g))) if g.size else 0.0
    trace.rows.append(TraceRow(it0, f, gn))
    it = it0
    for _ in range(opts.max_iter):
        if gn < opts.tol:
            break
        g2 = float(np.sum(g * g))
        # backtracking Armijo, trying a larger step first
        t *= 2.0
        while True:
            cand = phi - t * g
            fc, gc = _objective(cand, frozen, p, eps, opts.periodic_weight)
            if fc <= f - opts.armijo_c * t * g2:
                break
            t *= opts.shrink
            if t < 1e-300:
                fc = None
                break
        if fc is None:
            break
        it += 1
        phi, f, g = cand, fc, gc
        gn = float(np.max(np.abs(g)))
        trace.rows.append(TraceRow(it, f, gn))
    return phi, f, gn, it


def minimize(init: SpinField, p: ModelParams, opts: OptimizeOptions | None = None):
    """Descend from ``init`` with u(0, .) = (0, 1) held fixed.  Returns (SpinField, Trace).

    The energy in the trace includes the periodic penalty when its weight is
    positive.  For annealed restarts the trace lists the incumbent after each
    round, so it stays non-increasing.
    """
    opts = opts or OptimizeOptions()
    if boundary_violation(init) > BC_TOL:
        raise ValueError("initial field violates u(0,.) = (0,1)")
    st = AngleState.from_spins(init)
    eps = st.grid.eps
    trace = Trace()
    phi, f, gn, it = _descend(st.phi, st.frozen, p, eps, opts, trace, 0)
    if opts.method == "anneal":
        rng = np.random.default_rng(opts.seed)
        best, fbest, gbest = phi, f, gn
        for k in range(opts.anneal_rounds):
            a = opts.anneal_a0 * opts.anneal_r**k
            noise = rng.uniform(-a, a, size=best.shape)
            noise[st.frozen] = 0.0
            sub = Trace()
            cand, fc, gc, steps = _descend(best + noise, st.frozen, p, eps, opts, sub, 0)
            it += steps
            if fc < fbest:
                best, fbest, gbest = cand, fc, gc
                trace.rows.append(TraceRow(it, fbest, gbest))
        phi, f, gn = best, fbest, gbest
    phi = phi.copy()
    phi[st.frozen] = st.phi[st.frozen]
    out = SpinField.from_phi(st.grid, phi)
    trace.final_grad_norm = gn
    return out, trace
