"""Independent verification paths: rasters, Monte Carlo, checkers."""

import math

import numpy as np
import pytest

from isoshape.errors import (
    MassPreconditionError,
    OutOfBoundsError,
    ResolutionError,
    ValidationError,
)
from isoshape.geometry import dilate, make_ball, make_grid
from isoshape.oracle import (
    EDGE_FACTOR,
    RasterSet,
    check_en_lower_bound,
    check_rel_isop,
    check_v_lipschitz,
    mc_riesz,
    raster_from_predicate,
    raster_measures,
    rasterize,
    random_star,
    run_en_lower_bound,
    run_raster_agreement,
    run_rel_isop,
    run_v_lipschitz,
    symmetric_difference_area,
    weighted_density,
)


def _disk_raster(R=1.0, h=0.005, pad=None):
    ball = make_ball(R, np.zeros(2), make_grid(2, 128))
    return rasterize(ball, h, pad=pad)


def _square_raster(x_lo=0.0, h=0.05):
    def pred(pts):
        return ((pts[:, 0] >= x_lo) & (pts[:, 0] <= x_lo + 1.0)
                & (pts[:, 1] >= 0.0) & (pts[:, 1] <= 1.0))
    return raster_from_predicate(
        pred, ((x_lo, x_lo + 1.0), (0.0, 1.0)), h)


def test_raster_set_validation():
    with pytest.raises(ValidationError):
        RasterSet(h=0.0, x0=0.0, y0=0.0, mask=np.ones((4, 4), dtype=bool))
    with pytest.raises(ValidationError):
        RasterSet(h=0.1, x0=0.0, y0=0.0, mask=np.ones(16, dtype=bool))


def test_unit_square_volume_exact():
    rs = _square_raster()
    assert rs.volume == pytest.approx(1.0, abs=1e-12)
    assert rs.count == 400


def test_disk_raster_calibration():
    rs = _disk_raster(h=0.005)
    vol, per, wper = raster_measures(rs, 2.0)
    assert vol == pytest.approx(math.pi, rel=1e-3)
    # boundary |x| = 1, so the p = 2 weighted perimeter matches the
    # plain one up to pixel jitter of the density at the edge midpoints
    assert per == pytest.approx(2 * math.pi, rel=0.01)
    assert wper == pytest.approx(2 * math.pi, rel=0.01)
    assert wper == pytest.approx(per, rel=5e-3)


def test_rasterize_guards():
    small = make_ball(0.05, np.zeros(2), make_grid(2, 64))
    with pytest.raises(ResolutionError):
        rasterize(small, 0.02)
    with pytest.raises(ValidationError):
        rasterize(make_ball(1.0, np.zeros(3), make_grid(3, 12)), 0.1)
    with pytest.raises(ValidationError):
        rasterize(make_ball(1.0, np.zeros(2), make_grid(2, 64)), -0.1)


def test_symmetric_difference_exact_cells():
    a = _square_raster(0.0)
    b = _square_raster(0.1)
    assert symmetric_difference_area(a, b) == pytest.approx(0.2, abs=1e-12)
    assert symmetric_difference_area(a, a) == 0.0

    other_h = _square_raster(0.0, h=0.04)
    with pytest.raises(ValidationError):
        symmetric_difference_area(a, other_h)
    shifted = RasterSet(h=0.05, x0=0.025, y0=0.0,
                        mask=np.ones((20, 20), dtype=bool))
    with pytest.raises(ValidationError):
        symmetric_difference_area(a, shifted)


def test_mc_riesz_deterministic_and_guarded():
    disk = make_ball(1.0, np.zeros(2), make_grid(2, 64))
    est1, se1 = mc_riesz(disk, None, 0.5, 1_000_000, 7)
    est2, se2 = mc_riesz(disk, None, 0.5, 1_000_000, 7)
    assert (est1, se1) == (est2, se2)
    est3, _ = mc_riesz(disk, None, 0.5, 1_000_000, 8)
    assert est3 != est1
    assert se1 > 0.0

    with pytest.raises(ValidationError):
        mc_riesz(disk, None, 0.5, 250_000, 7)
    with pytest.raises(ValidationError):
        mc_riesz(disk, None, 2.5, 1_000_000, 7)


def test_mc_riesz_ball_d3_exact():
    # V(B_1) = 32 pi^2 / 15 in d=3 at alpha=1; 2 alpha < d, so the
    # sample standard error is trustworthy and 3 sigma is a real gate
    ball = make_ball(1.0, np.zeros(3), make_grid(3, 24))
    est, se = mc_riesz(ball, None, 1.0, 1_000_000, 11)
    exact = 32 * math.pi ** 2 / 15
    assert abs(est - exact) <= 3 * se
    assert se < 0.005 * exact


def test_mc_riesz_far_cross_term():
    a = make_ball(0.25, np.zeros(2), make_grid(2, 64))
    b = make_ball(0.25, np.array([8.0, 0.0]), make_grid(2, 64))
    est, se = mc_riesz(a, b, 1.0, 1_000_000, 13)
    far = (math.pi * 0.25 ** 2) ** 2 / 8.0
    assert est == pytest.approx(far, rel=5e-3)
    assert abs(est - far) <= 3 * se + 2e-3 * far


def test_mc_riesz_sampler_homogeneity():
    rng = np.random.default_rng(17)
    shape = random_star(rng, n=64, d=2, amp=0.08, kmax=3)
    big = dilate(shape, 2.0)
    alpha = 0.5
    est1, se1 = mc_riesz(shape, None, alpha, 1_000_000, 21)
    est2, se2 = mc_riesz(big, None, alpha, 1_000_000, 22)
    factor = 2.0 ** (2 * 2 - alpha)
    assert abs(est2 - factor * est1) <= 3 * math.hypot(se2, factor * se1)


def test_mc_riesz_raster_vs_shape_sampler():
    ball = make_ball(1.0, np.zeros(2), make_grid(2, 96))
    rs = rasterize(ball, 1.0 / 256)
    est_s, se_s = mc_riesz(ball, None, 0.5, 1_000_000, 31)
    est_r, se_r = mc_riesz(rs, None, 0.5, 1_000_000, 32)
    assert abs(est_s - est_r) <= 3 * math.hypot(se_s, se_r) + 2e-3 * est_s


def test_halfplane_relative_perimeter_direction_averaged():
    # a line through the origin meets the annulus 1 < |x| < 2 in two
    # segments of total length 2; the staircase estimate is only
    # isotropic on average, so gate the 8-angle mean, not each angle
    h = 1.0 / 96
    lengths = []
    for i in range(8):
        ang = i * math.pi / 8 + 0.0123
        nrm = np.array([math.cos(ang), math.sin(ang)])

        def pred(pts):
            return (pts @ nrm <= 0.0) & (np.linalg.norm(pts, axis=1) <= 3.0)

        rs = raster_from_predicate(pred, ((-3.2, 3.2), (-3.2, 3.2)), h)
        lhs, per, ratio = check_rel_isop(rs, 0)
        assert lhs == pytest.approx(math.sqrt(1.5 * math.pi), rel=0.02)
        assert ratio == pytest.approx(lhs / per, rel=1e-12)
        lengths.append(per)
    assert np.mean(lengths) == pytest.approx(2.0, abs=0.05)


def test_weighted_density_probes():
    rs = _disk_raster(h=0.005, pad=0.3)
    assert weighted_density(rs, (0.0, 0.0), 0.3, 0.0) == 0.0
    # lens fractions of B_0.15((1, 0)) against the unit disk, computed
    # on a 0.0005 reference grid; the |x|^2 weight favors the outer half
    for p, lens in ((0.0, 0.4841), (2.0, 0.4212)):
        val = weighted_density(rs, (1.0, 0.0), 0.15, p)
        assert val == pytest.approx(lens, abs=0.02)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.uniform(-0.5, 0.5, 2)
        val = weighted_density(rs, x, 0.2, 2.0)
        assert 0.0 <= val <= 0.5
    with pytest.raises(OutOfBoundsError):
        weighted_density(rs, (1.2, 0.0), 0.5, 2.0)


def test_v_lipschitz_mass_precondition():
    rs = _disk_raster(h=0.01)  # area pi > 1
    with pytest.raises(MassPreconditionError):
        check_v_lipschitz(rs, rs, 1.0)


def test_en_lower_bound_expansion():
    lhs, expansion = check_en_lower_bound(1e-4, 2.0, 2)
    assert lhs > 0.0
    assert lhs / expansion == pytest.approx(1.0, abs=0.02)
    with pytest.raises(ValidationError):
        check_en_lower_bound(0.5, 2.0, 2)
    with pytest.raises(ValidationError):
        check_en_lower_bound(1e-4, 0.0, 2)


def test_random_star_contract():
    rng = np.random.default_rng(5)
    from isoshape.geometry import volume
    for d, n in ((2, 64), (3, 16)):
        shape = random_star(rng, n=n, d=d)
        assert volume(shape) == pytest.approx(1.0, rel=1e-12)
        assert shape.radii.min() > 0.0
    fixed = random_star(np.random.default_rng(9), n=64, d=2)
    again = random_star(np.random.default_rng(9), n=64, d=2)
    assert np.array_equal(fixed.radii, again.radii)
    assert np.array_equal(fixed.center, again.center)


def test_checker_suites_single_trials():
    rep = run_raster_agreement(seed=1, trials=3)
    assert rep["check"] == "raster_agreement"
    assert rep["violations"] == 0
    assert rep["worst_margin"] > 0.0

    rep = run_v_lipschitz(seed=1, trials=2)
    assert rep["violations"] == 0

    rep = run_rel_isop(seed=1, blobs=2)
    assert rep["violations"] == 0
    assert len(rep["params"]["constants"]) == 4

    rep = run_en_lower_bound()
    assert rep["violations"] == 0
    assert rep["worst_margin"] > 0.0
