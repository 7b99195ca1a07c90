import numpy as np
import pytest

from j1j3.lattice import SpinField, make_grid


def random_spins(grid, rng, fix_boundary=False):
    phi = rng.uniform(-np.pi, np.pi, size=grid.shape)
    if fix_boundary:
        phi[0, :] = 0.0
    return SpinField.from_phi(grid, phi)


def smooth_spins(grid, rng, amp=0.3):
    """A low-frequency random phase, so that bond angles stay small."""
    n = grid.n
    x = grid.coords
    phi = np.zeros(grid.shape)
    for _ in range(4):
        kx, ky = rng.integers(1, 4, size=2)
        a = rng.normal() * amp
        phi += a * np.sin(np.pi * kx * x[:, None] + rng.uniform(0, 6)) * np.cos(np.pi * ky * x[None, :])
    phi -= phi[0:1, :]
    return SpinField.from_phi(grid, phi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each; collected here and echoed at the end
ACCEPTANCE_LINES = []


def report(k, ok, detail):
    line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((k, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
