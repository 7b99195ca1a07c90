"""Plain-text field files.

    # spinfield eps=<decimal> n=<int>
    i j sx sy                      one line per node, i fastest

Angular files use the header ``# angularfield`` and columns
``i j theta_hor theta_ver``; theta_hor does not exist at i = n-1 and theta_ver
not at j = n-1, those entries are written as ``nan``.  Floats use 17
significant digits, which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

import re

import numpy as np

from .lattice import AngularField, Grid, SpinField, make_grid

_HEADER = re.compile(r"^#\s*(spinfield|angularfield)\s+eps=(\S+)\s+n=(\d+)\s*$")


class FieldParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, kind: str, grid: Grid, a: np.ndarray, b: np.ndarray):
    n = grid.n
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {kind} eps={_fmt(grid.eps)} n={n}\n")
        for j in range(n):
            for i in range(n):
                fh.write(f"{i} {j} {_fmt(a[i, j])} {_fmt(b[i, j])}\n")


def write_spinfield(path, u: SpinField):
    _write(path, "spinfield", u.grid, u.spins[..., 0], u.spins[..., 1])


def write_angularfield(path, theta: AngularField):
    n = theta.grid.n
    a = np.full((n, n), np.nan)
    b = np.full((n, n), np.nan)
    a[:-1, :] = theta.theta_hor
    b[:, :-1] = theta.theta_ver
    _write(path, "angularfield", theta.grid, a, b)


def read_field(path):
    """Parse a field file; returns a SpinField or AngularField."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FieldParseError(1, "empty file")
    m = _HEADER.match(lines[0])
    if not m:
        raise FieldParseError(1, "expected '# spinfield eps=<decimal> n=<int>' or '# angularfield ...'")
    kind = m.group(1)
    try:
        eps = float(m.group(2))
        grid = make_grid(eps)
    except ValueError as exc:
        raise FieldParseError(1, str(exc)) from None
    n = int(m.group(3))
    if n != grid.n:
        raise FieldParseError(1, f"n={n} does not match eps={m.group(2)} (expected n={grid.n})")
    body = [(k + 2, ln) for k, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != n * n:
        ln = body[-1][0] + 1 if len(body) < n * n and body else (body[n * n][0] if body else 2)
        raise FieldParseError(ln, f"expected {n * n} node lines, found {len(body)}")
    a = np.empty((n, n))
    b = np.empty((n, n))
    for k, (lineno, ln) in enumerate(body):
        parts = ln.split()
        if len(parts) != 4:
            raise FieldParseError(lineno, f"expected 4 fields, got {len(parts)}")
        try:
            i, j = int(parts[0]), int(parts[1])
            x, y = float(parts[2]), float(parts[3])
        except ValueError:
            raise FieldParseError(lineno, f"cannot parse {ln!r}") from None
        if (i, j) != (k % n, k // n):
            raise FieldParseError(lineno, f"node ({i}, {j}) out of order, expected ({k % n}, {k // n})")
        a[i, j], b[i, j] = x, y
    if kind == "spinfield":
        return SpinField(grid, np.stack([a, b], -1))
    return AngularField(grid, a[:-1, :], b[:, :-1])
