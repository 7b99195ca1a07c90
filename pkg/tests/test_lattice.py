import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from j1j3.lattice import (
    AngularField, ModelParams, SpinField, angles_from_spins, chirality_from_angles,
    make_grid, node_count, plaquette_curl, rotate, signed_angle, spins_from_angles,
)
from j1j3.topology import gradient_field

from conftest import random_spins


@pytest.mark.parametrize("eps,n,nn", [(1 / 4, 4, 8), (1 / 5, 5, 15), (0.5 - 1e-9, 3, 3)])
def test_make_grid_counts(eps, n, nn):
    g = make_grid(eps)
    assert g.n == n
    assert len(g.index_set("NN_hor")) == nn
    assert np.all(g.coords < 1.0)


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.5, 0.7])
def test_make_grid_rejects(eps):
    with pytest.raises(ValueError):
        make_grid(eps)


@given(st.floats(min_value=1e-3, max_value=0.4999))
def test_node_count_definition(eps):
    n = node_count(eps)
    assert (n - 1) * eps < 1.0 <= n * eps


def test_index_sets_shapes():
    g = make_grid(1 / 6)
    assert len(g.index_set("I")) == 36
    assert len(g.index_set("N_hor")) == 5 * 6
    assert len(g.index_set("N_ver")) == 6 * 5
    nn = g.index_set("NN_ver")
    assert np.all(nn[:, 1] + 2 <= g.n - 1)


def test_model_params():
    p = ModelParams(0.2, 0.05)
    assert p.gamma == pytest.approx(2.0)
    assert p.theta_opt_hor == pytest.approx(np.arccos(0.8))
    with pytest.raises(ValueError):
        ModelParams(0.0, 0.5)
    with pytest.raises(ValueError):
        ModelParams(0.5, 1.0)
    with pytest.raises(ValueError):
        ModelParams(0.1, 0.2).isotropic_delta


@pytest.mark.parametrize("v,t,out", [((0, 1), 0.0, (0, 1)), ((0, 1), np.pi / 2, (-1, 0)), ((1, 0), np.pi, (-1, 0))])
def test_rotate_examples(v, t, out):
    assert np.allclose(rotate(v, t), out, atol=1e-12)


@given(st.floats(-10, 10), st.floats(-np.pi, np.pi))
def test_rotate_preserves_norm(t, a):
    v = np.array([np.cos(a), np.sin(a)])
    assert abs(np.linalg.norm(rotate(v, t)) - 1) < 1e-12


def test_signed_angle_conventions():
    assert signed_angle(np.array([0.0, 1.0]), np.array([0.0, -1.0])) == -np.pi
    assert signed_angle(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == 0.0
    # counterclockwise is positive
    assert signed_angle(np.array([0.0, 1.0]), np.array([-1.0, 0.0])) == pytest.approx(np.pi / 2)


def test_antipodal_pair_maps_to_minus_pi():
    g = make_grid(1 / 4)
    s = np.zeros((4, 4, 2))
    s[..., 1] = 1.0
    s[1, 0] = (0.0, -1.0)
    th = angles_from_spins(SpinField(g, s))
    assert th.theta_hor[0, 0] == -np.pi
    assert th.in_range()


def test_constant_and_helix_angles():
    g = make_grid(1 / 8)
    th = angles_from_spins(SpinField.from_phi(g, np.zeros(g.shape)))
    assert np.all(th.theta_hor == 0) and np.all(th.theta_ver == 0)
    t = 0.7
    I, J = np.meshgrid(np.arange(g.n), np.arange(g.n), indexing="ij")
    u = SpinField(g, rotate(np.array([0.0, 1.0]), (I + J) * t))
    th = angles_from_spins(u)
    assert np.allclose(th.theta_hor, t, atol=1e-12)
    assert np.allclose(th.theta_ver, t, atol=1e-12)


def test_spins_from_angles_examples():
    g = make_grid(1 / 8)
    u = spins_from_angles(AngularField.constant(g, 0.0, 0.0))
    assert np.all(u.spins == np.array([0.0, 1.0]))
    p = ModelParams.isotropic(0.3)
    t = p.theta_opt_hor
    u = spins_from_angles(AngularField.constant(g, t, t))
    I, J = np.meshgrid(np.arange(g.n), np.arange(g.n), indexing="ij")
    assert np.allclose(u.spins, rotate(np.array([0.0, 1.0]), (I + J) * t), atol=1e-12)


def test_spins_from_angles_rejects_bad_curl():
    g = make_grid(1 / 4)
    th = np.zeros((3, 4))
    th[1, 1] = 1.0
    with pytest.raises(ValueError, match="plaquette"):
        spins_from_angles(AngularField(g, th, np.zeros((4, 3))))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1 / 5, 1 / 8, 1 / 13]))
def test_round_trip_random_spins(seed, eps):
    g = make_grid(eps)
    u = random_spins(g, np.random.default_rng(seed))
    th = angles_from_spins(u)
    assert th.in_range()
    v = spins_from_angles(th, u.spins[0, 0])
    assert np.max(np.abs(v.spins - u.spins)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_curl_free(seed):
    rng = np.random.default_rng(seed)
    g = make_grid(1 / 10)
    pot = rng.uniform(-0.3, 0.3, size=g.shape)
    th = gradient_field(g, pot)
    th = AngularField(g, th.theta_hor * g.eps, th.theta_ver * g.eps)
    back = angles_from_spins(spins_from_angles(th))
    assert np.max(np.abs(back.theta_hor - th.theta_hor)) < 1e-9
    assert np.max(np.abs(back.theta_ver - th.theta_ver)) < 1e-9


def test_chirality_examples():
    g = make_grid(1 / 8)
    p = ModelParams(0.3, 0.1)
    chi = chirality_from_angles(AngularField.constant(g, p.theta_opt_hor, p.theta_opt_ver), p)
    assert np.allclose(chi.w, 1.0, atol=1e-12) and np.allclose(chi.z, 1.0, atol=1e-12)
    chi = chirality_from_angles(AngularField.constant(g, -p.theta_opt_hor, p.theta_opt_ver), p)
    assert np.allclose(chi.w, -1.0, atol=1e-12) and np.allclose(chi.z, 1.0, atol=1e-12)
    chi = chirality_from_angles(AngularField.constant(g, 0.0, 0.0), p)
    assert np.all(chi.w == 0) and np.all(chi.z == 0)
    gw, z = chi.scaled
    assert gw.shape == chi.w.shape


@given(st.floats(1e-3, 0.999), st.floats(-np.pi, np.pi))
def test_chirality_bounds(delta, theta):
    g = make_grid(1 / 4)
    p = ModelParams.isotropic(delta)
    chi = chirality_from_angles(AngularField.constant(g, theta, theta), p)
    assert np.all(np.abs(chi.w) <= np.sqrt(2 / delta) * (1 + 1e-15))


def test_plaquette_curl_quarter_turn():
    th = np.array([[-np.pi / 2, np.pi / 2]])
    tv = np.array([[np.pi / 2], [-np.pi / 2]])
    assert plaquette_curl(th, tv)[0, 0] == pytest.approx(-2 * np.pi)


def test_spinfield_validation():
    g = make_grid(1 / 4)
    with pytest.raises(ValueError):
        SpinField(g, np.zeros((3, 4, 2)))
    u = SpinField(g, np.full((4, 4, 2), 0.5))
    with pytest.raises(ValueError, match="unit"):
        u.check_norms()
