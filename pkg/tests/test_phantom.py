"""Phantom evaluation, rasterization, and the spherical-mean oracle."""

import numpy as np
import pytest

from attenopat.phantom import (
    GaussianBlob,
    Phantom,
    VolumeGrid,
    check_above_plane,
    check_inside_sphere,
    rasterize,
    single_blob,
    spherical_mean_oracle,
)
from attenopat.quadrature import unit_directions_product


def surface_quadrature_mean(phantom, t, xi, n_theta=48, n_phi=96):
    """(1/4pi) int_{S2} t h(xi + t eta) dS(eta) by product quadrature."""
    dirs, w = unit_directions_product(n_theta, n_phi)
    pts = np.asarray(xi) + t * dirs
    return t * np.sum(w * phantom.eval(pts)) / (4.0 * np.pi)


def test_eval_at_center_and_one_sigma():
    p = single_blob(center=(0.5, -0.2, 1.0), width=0.3, amplitude=2.0)
    assert p.eval(np.array([0.5, -0.2, 1.0])) == pytest.approx(2.0)
    assert p.eval(np.array([0.8, -0.2, 1.0])) == pytest.approx(2.0 * np.exp(-0.5))


def test_eval_two_blob_midpoint():
    p = Phantom((GaussianBlob((0, 0, 1), 0.2, 1.0), GaussianBlob((0, 0, 2), 0.4, 0.5)))
    x = np.array([0.0, 0.0, 1.5])
    expect = np.exp(-0.25 / (2 * 0.04)) + 0.5 * np.exp(-0.25 / (2 * 0.16))
    assert p.eval(x) == pytest.approx(expect, rel=1e-14)


def test_mean_oracle_centered_blob():
    # d = 0: (Rh)(t, center) = t a exp(-t^2 / (2 s^2))
    p = single_blob(center=(0.0, 0.0, 0.0), width=0.5, amplitude=1.3)
    for t in (0.3, 1.0, 2.4):
        got = spherical_mean_oracle(p, t, np.zeros(3))
        assert got == pytest.approx(1.3 * t * np.exp(-t ** 2 / 0.5), rel=1e-13)


def test_mean_oracle_small_t_recovers_point_value():
    p = single_blob(center=(0.2, 0.1, 0.4), width=0.3, amplitude=0.8)
    xi = np.array([0.3, -0.1, 0.2])
    t = 1e-5
    assert spherical_mean_oracle(p, t, xi) / t == pytest.approx(float(p.eval(xi)), rel=1e-8)


def test_mean_oracle_off_center_vs_quadrature():
    # (t, d, s) = (1, 2, 0.5) spot value against dense surface quadrature
    p = single_blob(center=(0.0, 0.0, 2.0), width=0.5, amplitude=1.0)
    xi = np.zeros(3)
    got = spherical_mean_oracle(p, 1.0, xi)
    assert abs(got - surface_quadrature_mean(p, 1.0, xi)) < 1e-10


def test_mean_oracle_random_draws_vs_quadrature():
    rng = np.random.default_rng(42)
    for _ in range(100):
        c = rng.uniform(-1, 1, 3)
        s = rng.uniform(0.2, 0.8)
        a = rng.uniform(0.5, 2.0)
        p = Phantom((GaussianBlob(tuple(c), s, a),))
        xi = rng.uniform(-2, 2, 3)
        t = rng.uniform(0.05, 4.0)
        ref = surface_quadrature_mean(p, t, xi)
        got = spherical_mean_oracle(p, float(t), xi)
        assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))


def test_mean_oracle_rejects_negative_radius():
    with pytest.raises(ValueError):
        spherical_mean_oracle(single_blob(), -0.5, np.zeros(3))


def test_positivity_and_support():
    p = Phantom((GaussianBlob((0.3, 0, 0), 0.2, 1.0), GaussianBlob((0, 0.1, -0.2), 0.3, 0.7)))
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1.5, 1.5, size=(500, 3))
    assert np.all(p.eval(pts) > 0)
    # 6-sigma truncation leaves an exp(-18) ~ 1.5e-8 tail per blob
    far = p.support_radius * np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, -1.0]]) * 1.001
    assert np.all(p.eval(far) < 1e-7 * p.max_amplitude())


def test_rasterize_zero_and_single_node():
    zero = Phantom(())
    g = rasterize(zero, origin=(-1, -1, -1), spacing=(0.5, 0.5, 0.5), dims=(5, 5, 5))
    assert np.all(g.values == 0)
    p = single_blob(center=(0.25, 0.5, -0.75), width=0.3, amplitude=1.7)
    g1 = rasterize(p, origin=(0.25, 0.5, -0.75), spacing=(1, 1, 1), dims=(2, 2, 2))
    assert g1.values[0, 0, 0] == pytest.approx(1.7)


def test_rasterize_l2_norm_of_gaussian():
    # ||a exp(-|x|^2/(2 s^2))||_2 = a (s sqrt(pi))^{3/2}
    a, s = 1.4, 0.4
    p = single_blob(center=(0, 0, 0), width=s, amplitude=a)
    n = 64
    half = 6 * s
    step = 2 * half / n
    g = rasterize(p, origin=(-half,) * 3, spacing=(step,) * 3, dims=(n,) * 3)
    expect = a * (s * np.sqrt(np.pi)) ** 1.5
    assert g.l2_norm() == pytest.approx(expect, rel=0.01)


def test_geometry_validators():
    check_inside_sphere(single_blob(width=0.1), radius=2.0)
    with pytest.raises(ValueError):
        check_inside_sphere(single_blob(width=0.5), radius=1.0)
    check_above_plane(single_blob(center=(0, 0, 1.0), width=0.1))
    with pytest.raises(ValueError):
        check_above_plane(single_blob(center=(0, 0, -1.0)))


def test_volume_grid_shape_guard():
    with pytest.raises(Exception):
        VolumeGrid(origin=(0, 0, 0), spacing=(1, 1, 1), dims=(2, 2, 2),
                   values=np.zeros((2, 2, 3)))
