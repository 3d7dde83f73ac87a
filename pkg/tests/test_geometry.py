"""Grids, star shapes, measures, and their exact invariants."""

import json
import math

import numpy as np
import pytest

from isoshape.errors import OverlapError, ValidationError
from isoshape.geometry import (
    Configuration,
    StarShape,
    config_membership,
    dilate,
    load_configuration,
    make_ball,
    make_grid,
    save_configuration,
    sphere_area,
    tangential_gradient,
    total_volume,
    unit_ball_volume,
    volume,
)


def test_grid_weights_sum_to_sphere_area():
    assert abs(make_grid(2, 64).weights.sum() - 2 * math.pi) <= 1e-10
    assert abs(make_grid(3, 32).weights.sum() - 4 * math.pi) <= 1e-10
    assert sphere_area(2) == pytest.approx(2 * math.pi, abs=1e-14)
    assert sphere_area(3) == pytest.approx(4 * math.pi, abs=1e-14)


def test_grid_nodes_unit_length():
    for d, n in ((2, 64), (3, 16)):
        g = make_grid(d, n)
        norms = np.linalg.norm(g.nodes, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-12
        assert np.all(g.weights > 0)


def test_grid_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        make_grid(4, 32)
    with pytest.raises(ValidationError):
        make_grid(2, 4)


def test_grid_deterministic():
    a, b = make_grid(3, 24), make_grid(3, 24)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.weights, b.weights)


def test_ball_volume_closed_forms():
    g2, g3 = make_grid(2, 64), make_grid(3, 24)
    assert volume(make_ball(1.0, np.zeros(2), g2)) == pytest.approx(
        math.pi, rel=1e-10)
    r0 = math.pi ** -0.5
    assert volume(make_ball(r0, np.zeros(2), g2)) == pytest.approx(1.0, rel=1e-10)
    assert volume(make_ball(2.0, np.zeros(3), g3)) == pytest.approx(
        32 * math.pi / 3, rel=1e-10)
    for R in (0.1, 0.7, 1.0, 4.0, 10.0):
        for d, g in ((2, g2), (3, g3)):
            got = volume(make_ball(R, np.zeros(d), g))
            assert got == pytest.approx(unit_ball_volume(d) * R ** d, rel=1e-10)


def test_volume_translation_invariant_exactly():
    g = make_grid(2, 64)
    assert volume(make_ball(1.0, np.array([5.0, 0.0]), g)) == volume(
        make_ball(1.0, np.zeros(2), g))


def test_volume_fourier_example():
    g = make_grid(2, 128)
    shape = StarShape(grid=g, center=np.zeros(2),
                      radii=1.0 + 0.5 * np.cos(g.theta))
    assert volume(shape) == pytest.approx(9 * math.pi / 8, rel=1e-12)


def test_radius_floor_enforced():
    g = make_grid(2, 32)
    with pytest.raises(ValidationError):
        StarShape(grid=g, center=np.zeros(2), radii=np.full(32, 1e-9))
    with pytest.raises(ValidationError):
        make_ball(1e-9, np.zeros(2), g)


def test_dilate_homogeneity_and_center():
    g = make_grid(2, 48)
    rng = np.random.default_rng(3)
    shape = StarShape(grid=g, center=np.array([3.0, 0.0]),
                      radii=1.0 + 0.2 * rng.standard_normal(48).clip(-0.9, 0.9))
    v = volume(shape)
    for t in (0.5, 2.0, 3.0):
        big = dilate(shape, t)
        assert volume(big) == pytest.approx(t ** 2 * v, rel=1e-10)
        assert big.center[0] == pytest.approx(t * 3.0, rel=1e-14)
    same = dilate(shape, 1.0)
    assert np.array_equal(same.radii, shape.radii)
    with pytest.raises(ValidationError):
        dilate(shape, -1.0)


def test_configuration_disjointness_certificate():
    g = make_grid(2, 32)
    a = make_ball(1.0, np.zeros(2), g)
    b = make_ball(1.0, np.array([4.0, 0.0]), g)
    cfg = Configuration((a, b))
    assert total_volume(cfg) == pytest.approx(2 * math.pi, rel=1e-10)
    with pytest.raises(OverlapError):
        Configuration((a, make_ball(1.0, np.array([1.5, 0.0]), g))).validate()


def test_total_volume_empty_and_single():
    g = make_grid(2, 32)
    assert total_volume(Configuration(())) == 0.0
    r0 = math.pi ** -0.5
    cfg = Configuration((make_ball(r0, np.zeros(2), g),))
    assert total_volume(cfg) == pytest.approx(1.0, rel=1e-10)


def test_tangential_gradient_linearity_and_const():
    g = make_grid(2, 64)
    rng = np.random.default_rng(1)
    f, h = rng.standard_normal(64), rng.standard_normal(64)
    gf, gh = tangential_gradient(f, g), tangential_gradient(h, g)
    combo = tangential_gradient(2.0 * f - 3.0 * h, g)
    assert np.abs(combo - (2.0 * gf - 3.0 * gh)).max() <= 1e-12
    assert np.abs(tangential_gradient(np.ones(64), g)).max() == 0.0


def test_tangential_gradient_cos_theta():
    g = make_grid(2, 256)
    grad = tangential_gradient(np.cos(g.theta), g)
    mags = np.linalg.norm(grad, axis=1)
    assert np.abs(mags - np.abs(np.sin(g.theta))).max() <= 1e-6


def test_tangential_gradient_mode3_norm():
    g = make_grid(2, 512)
    grad = tangential_gradient(np.cos(3 * g.theta), g)
    norm_sq = float(g.weights @ (grad ** 2).sum(axis=1))
    assert norm_sq == pytest.approx(9 * math.pi, rel=1e-6)


def test_membership_ball_and_config():
    g = make_grid(2, 64)
    cfg = Configuration((make_ball(1.0, np.zeros(2), g),
                         make_ball(0.5, np.array([3.0, 0.0]), g)))
    pts = np.array([[0.0, 0.0], [0.9, 0.0], [1.1, 0.0],
                    [3.0, 0.4], [3.0, 0.6], [2.0, 0.0]])
    got = config_membership(cfg, pts)
    assert got.tolist() == [True, True, False, True, False, False]


def test_configuration_json_round_trip(tmp_path):
    g = make_grid(2, 48)
    rng = np.random.default_rng(7)
    shape = StarShape(grid=g, center=np.array([0.1, -0.2]),
                      radii=1.0 + 0.1 * rng.standard_normal(48))
    cfg = Configuration((shape, make_ball(0.4, np.array([5.0, 0.0]), g)))
    path = tmp_path / "cfg.json"
    save_configuration(path, cfg)
    back = load_configuration(path)
    assert len(back.components) == 2
    for a, b in zip(cfg.components, back.components):
        assert np.array_equal(a.radii, b.radii)
        assert np.array_equal(a.center, b.center)
        assert a.grid.d == b.grid.d and a.grid.n == b.grid.n


def test_load_rejects_invalid_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(
        {"d": 2, "components": [{"center": [0, 0],
                                 "grid": {"kind": "uniform-angle", "n": 32},
                                 "radial": [-1.0] * 32}]}))
    with pytest.raises(ValidationError):
        load_configuration(path)
