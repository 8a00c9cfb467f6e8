import math

import numpy as np
import pytest
from scipy import integrate

from mmcell.config import ScenarioConfig
from mmcell.geometry import (
    ContaminationCoefficients,
    Deployment,
    PathLossModel,
    contamination_coefficients,
    drop_deployment,
    hexagon_circumradius,
    hexagon_mean_distance,
    noise_power,
    path_loss,
    sample_in_hexagon,
)
from mmcell.simulate import rng_for

MODEL_28GHZ = PathLossModel(alpha_pl=1.9, varrho_pl=20.0, carrier_hz=28e9)


def test_path_loss_at_one_meter_matches_hand_evaluation():
    # independent evaluation of the empirical model at d = 1 m where the
    # slope term vanishes: 10^(-2 log10(4 pi f / c))
    expected = 10.0 ** (-2.0 * math.log10(4.0 * math.pi * 28e9 / 3e8))
    assert expected == pytest.approx(7.26954e-07, rel=1e-5)
    assert path_loss(1.0, MODEL_28GHZ) == pytest.approx(expected, rel=1e-12)


def test_path_loss_slope_per_decade():
    assert path_loss(10.0, MODEL_28GHZ) == pytest.approx(
        path_loss(1.0, MODEL_28GHZ) / 10**1.9, rel=1e-12
    )


def test_path_loss_trivial_model_is_unity():
    model = PathLossModel(alpha_pl=0.0, varrho_pl=0.0, carrier_hz=28e9)
    for d in (0.5, 1.0, 123.0):
        assert path_loss(d, model) == pytest.approx(1.0)


def test_path_loss_monotone_and_loglog_slope():
    d = np.logspace(0, 3, 40)
    g = path_loss(d, MODEL_28GHZ)
    assert np.all(np.diff(g) < 0)
    slope = np.diff(np.log10(g)) / np.diff(np.log10(d))
    assert np.allclose(slope, -1.9, atol=1e-12)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss(0.0, MODEL_28GHZ)
    with pytest.raises(ValueError):
        path_loss(-3.0, MODEL_28GHZ)


def test_noise_power_matches_paper_operating_point():
    sigma = noise_power(250e6, 300.0)
    assert sigma == pytest.approx(1.035e-12, rel=1e-3)
    assert 10 * math.log10(sigma * 1000) == pytest.approx(-89.85, abs=0.01)


def test_noise_power_linearity_and_zero_temperature():
    assert noise_power(500e6, 300.0) == pytest.approx(2 * noise_power(250e6, 300.0))
    assert noise_power(250e6, 0.0) == 0.0


def test_drop_neighbor_ring_positions():
    cfg = ScenarioConfig(L=6, isd_m=200.0, trials=1)
    dep = drop_deployment(cfg, rng_for(1, 0))
    assert np.allclose(dep.bs_xy[0], [0.0, 0.0])
    assert np.allclose(dep.bs_xy[1], [200.0, 0.0])
    assert np.allclose(np.linalg.norm(dep.bs_xy[1:], axis=1), 200.0)


def test_drop_is_deterministic_given_stream():
    cfg = ScenarioConfig()
    a = drop_deployment(cfg, rng_for(42, 7))
    b = drop_deployment(cfg, rng_for(42, 7))
    assert np.array_equal(a.bs_xy, b.bs_xy)
    assert np.array_equal(a.user_xy, b.user_xy)


def test_users_inside_cell_and_beyond_min_distance():
    cfg = ScenarioConfig(L=6, N=50, M=64, isd_m=200.0)
    dep = drop_deployment(cfg, rng_for(3, 0))
    d = dep.serving_distances()
    assert np.all(d >= cfg.d_min_m)
    assert np.all(d <= hexagon_circumradius(cfg.isd_m) + 1e-9)


def _mean_distance_quadrature(radius, d_min):
    """2-D quadrature oracle over one 30-degree wedge of the hexagon."""
    a = radius * math.sqrt(3.0) / 2.0
    num, _ = integrate.quad(lambda t: ((a / math.cos(t)) ** 3 - d_min**3) / 3.0, 0, math.pi / 6)
    den, _ = integrate.quad(lambda t: ((a / math.cos(t)) ** 2 - d_min**2) / 2.0, 0, math.pi / 6)
    return num / den


def test_hexagon_mean_distance_against_quadrature_oracle():
    radius = hexagon_circumradius(200.0)
    for d_min in (0.0, 10.0):
        oracle = _mean_distance_quadrature(radius, d_min)
        assert hexagon_mean_distance(radius, d_min) == pytest.approx(oracle, rel=1e-9)
    # closed form at d_min = 0: R (1/3 + ln(3)/4)
    assert hexagon_mean_distance(radius, 0.0) == pytest.approx(
        radius * (1 / 3 + math.log(3) / 4), rel=1e-9
    )


def test_empirical_mean_user_distance_matches_oracle():
    cfg = ScenarioConfig(L=0, N=10_000, M=10_000, isd_m=200.0)
    radius = hexagon_circumradius(cfg.isd_m)
    dep = drop_deployment(cfg, rng_for(11, 0))
    mean = dep.serving_distances().mean()
    oracle = _mean_distance_quadrature(radius, cfg.d_min_m)
    assert abs(mean - oracle) / oracle < 0.03


def test_hexagon_sampler_respects_boundaries():
    rng = rng_for(5, 1)
    radius = 100.0
    pts = np.array([sample_in_hexagon(rng, radius, 10.0) for _ in range(500)])
    r = np.linalg.norm(pts, axis=1)
    assert np.all(r >= 10.0)
    assert np.all(np.abs(pts[:, 0]) <= radius * math.sqrt(3) / 2 + 1e-9)
    assert np.all(np.abs(pts[:, 1]) <= radius - np.abs(pts[:, 0]) / math.sqrt(3) + 1e-9)


def test_explicit_mode_splits_xi_sq_exactly():
    cfg = ScenarioConfig(L=6, xi_sq=0.01)
    dep = drop_deployment(cfg, rng_for(cfg.seed, 0))
    coeffs = contamination_coefficients(cfg, dep)
    assert coeffs.rho_sq.shape == (6, cfg.N)
    assert np.allclose(coeffs.rho_sq, 0.01 / 6)
    assert np.allclose(coeffs.xi_sq_per_user(), 0.01)


def test_geometric_mode_equal_distances_give_unit_rho():
    # hand-built deployment: every cross distance equals the reference distance
    cfg = ScenarioConfig(L=2, N=3, M=8, contamination_mode="geometric",
                         xi_sq=None, ref_distance_m=50.0)
    bs = np.array([[0.0, 0.0], [200.0, 0.0], [-200.0, 0.0]])
    users = np.zeros((3, 3, 2))
    for c in range(3):
        users[c, :, :] = bs[c] + np.array([50.0, 0.0])
    users[1] = np.array([50.0, 0.0])   # cell-1 users sit 50 m from the desired BS
    users[2] = np.array([-50.0, 0.0])
    dep = Deployment(bs_xy=bs, user_xy=users)
    coeffs = contamination_coefficients(cfg, dep)
    assert np.allclose(coeffs.rho_sq, 1.0)


def test_geometric_mode_median_xi_is_reproducible():
    cfg = ScenarioConfig(L=6, contamination_mode="geometric", xi_sq=None)
    medians = []
    for _ in range(2):
        dep = drop_deployment(cfg, rng_for(cfg.seed, 0))
        coeffs = contamination_coefficients(cfg, dep)
        medians.append(float(np.median(coeffs.xi_sq_per_user())))
    assert medians[0] == medians[1]
    assert medians[0] > 0


def test_zeta_from_geometry_and_ref_gain_positive():
    cfg = ScenarioConfig()
    dep = drop_deployment(cfg, rng_for(cfg.seed, 0))
    coeffs = contamination_coefficients(cfg, dep)
    assert isinstance(coeffs, ContaminationCoefficients)
    assert coeffs.ref_gain > 0
    assert coeffs.zeta_sq.shape == (cfg.L, cfg.N)
    assert np.all(coeffs.zeta_sq > 0)
