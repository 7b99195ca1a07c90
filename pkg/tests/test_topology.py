import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from j1j3 import constructions as cons
from j1j3.lattice import AngularField, ModelParams, SpinField, angles_from_spins, make_grid
from j1j3.topology import (
    discrete_curl, gradient_field, potential, vortex_energy_bound_check, vortices,
)

from conftest import random_spins


def quarter_turn_field(n=4):
    g = make_grid(1 / n)
    th = np.zeros((n - 1, n))
    tv = np.zeros((n, n - 1))
    th[0, 0], th[0, 1] = -np.pi / 2, np.pi / 2
    tv[0, 0], tv[1, 0] = np.pi / 2, -np.pi / 2
    return AngularField(g, th, tv)


def test_curl_constant_is_zero():
    g = make_grid(1 / 8)
    assert np.all(discrete_curl(AngularField.constant(g, 0.3, -1.1)).values == 0)


def test_curl_quarter_turn():
    c = discrete_curl(quarter_turn_field()).values
    assert c[0, 0] == pytest.approx(-2 * np.pi)


def test_embedded_quarter_turn_single_vortex():
    # spins point at angle -atan2(y - 1/2, x - 1/2) - pi/4 around the centre of
    # plaquette (0, 0); the four corner bonds are the quarter turns above
    g = make_grid(1 / 6)
    I, J = np.meshgrid(np.arange(g.n), np.arange(g.n), indexing="ij")
    a = -np.arctan2(J - 0.5, I - 0.5) - np.pi / 4
    u = SpinField(g, np.stack([np.cos(a), np.sin(a)], -1))
    th = angles_from_spins(u)
    assert th.theta_hor[0, 0] == pytest.approx(-np.pi / 2)
    assert th.theta_ver[0, 0] == pytest.approx(np.pi / 2)
    vs = vortices(th)
    assert vs.plaquettes == ((0, 0, -1),)
    assert vs.to_json_list() == [{"i": 0, "j": 0, "winding": -1}]


def test_curl_of_gradient_is_zero(rng):
    g = make_grid(1 / 12)
    th = gradient_field(g, rng.normal(size=g.shape))
    assert np.max(np.abs(discrete_curl(th).values)) < 1e-12


def test_vortices_rejects_unquantized():
    g = make_grid(1 / 4)
    th = np.zeros((3, 4))
    th[1, 1] = np.pi
    with pytest.raises(ValueError):
        vortices(AngularField(g, th, np.zeros((4, 3))))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1 / 5, 1 / 9, 1 / 16]))
def test_quantization_random_spins(seed, eps):
    u = random_spins(make_grid(eps), np.random.default_rng(seed))
    c = discrete_curl(angles_from_spins(u)).values
    k = np.round(c / (2 * np.pi))
    assert np.all(np.abs(k) <= 1)
    assert np.max(np.abs(c - 2 * np.pi * k)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.01, 0.1, 0.3, 0.49]))
def test_vortex_bound_random(seed, delta):
    u = random_spins(make_grid(1 / 10), np.random.default_rng(seed))
    rep = vortex_energy_bound_check(u, ModelParams.isotropic(delta))
    assert rep.holds


def test_vortex_bound_ferro_and_competitor():
    g = make_grid(1 / 64)
    p = ModelParams.isotropic(0.04)
    rep = vortex_energy_bound_check(cons.ferromagnet(g), p)
    assert rep.n_vortices == 0 and rep.lhs == 0 and rep.holds
    rep = vortex_energy_bound_check(cons.vortex_competitor(g, p), p)
    assert rep.n_vortices > 0 and rep.holds
    assert rep.min_max_angle >= np.pi / 2
    assert rep.lhs <= rep.rhs


def test_vortex_bound_delta_range():
    u = cons.ferromagnet(make_grid(1 / 8))
    with pytest.raises(ValueError):
        vortex_energy_bound_check(u, ModelParams.isotropic(0.6))
    with pytest.raises(ValueError):
        vortex_energy_bound_check(u, ModelParams(0.1, 0.2))


def test_potential_examples():
    g = make_grid(1 / 8)
    assert np.all(potential(AngularField.constant(g, 0, 0)).u == 0)
    a, b = 0.3, -0.2
    pg = potential(AngularField.constant(g, a, b), scale=1 / g.eps)
    I, J = np.meshgrid(np.arange(g.n), np.arange(g.n), indexing="ij")
    assert np.allclose(pg.u, a * I + b * J, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_potential_round_trip(seed):
    rng = np.random.default_rng(seed)
    g = make_grid(1 / 11)
    u0 = rng.normal(size=g.shape)
    u0 -= u0[0, 0]
    pg = potential(gradient_field(g, u0), scale=1.0)
    assert np.max(np.abs(pg.u - u0)) < 1e-10


def test_potential_exists_iff_vortex_free(rng):
    g = make_grid(1 / 8)
    for _ in range(30):
        th = angles_from_spins(random_spins(g, rng))
        free = vortices(th).count == 0
        try:
            potential(th)
            ok = True
        except ValueError:
            ok = False
        assert ok == free
    with pytest.raises(ValueError, match="curl"):
        potential(quarter_turn_field())
