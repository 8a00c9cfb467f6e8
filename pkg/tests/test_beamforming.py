import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mmcell.beamforming import array_gain, build_bank, mean_array_gain, project_channel
from mmcell.channel import steering_from_cos
from mmcell.simulate import rng_for


def test_bank_matched_filter_gain():
    bs_cos = np.array([0.3, -0.5, 0.0])
    ms_cos = np.array([0.1, 0.9, -0.2])
    bank = build_bank(bs_cos, ms_cos, m_bs=32, p_ue=8)
    for k, c in enumerate(bs_cos):
        steer = steering_from_cos(32, c)
        assert bank.F_rf[:, k] @ steer == pytest.approx(np.sqrt(32), rel=1e-12)
    assert np.allclose(np.linalg.norm(bank.F_rf, axis=0), 1.0)
    assert np.allclose(np.linalg.norm(bank.w, axis=1), 1.0)
    assert np.trace(bank.F_rf.conj().T @ bank.F_rf).real == pytest.approx(3.0, rel=1e-12)


def test_bank_duplicate_angles_give_identical_columns():
    bank = build_bank([0.25, 0.25], [0.1, -0.1], m_bs=16, p_ue=4)
    assert np.array_equal(bank.F_rf[:, 0], bank.F_rf[:, 1])


def test_bank_misalignment_hook_off_by_default():
    a = build_bank([0.3], [0.1], 8, 4)
    b = build_bank([0.3], [0.1], 8, 4, cos_err_std=0.0)
    assert np.array_equal(a.F_rf, b.F_rf)
    c = build_bank([0.3], [0.1], 8, 4, cos_err_std=0.05, rng=rng_for(1, 0))
    assert not np.array_equal(a.F_rf, c.F_rf)
    with pytest.raises(ValueError):
        build_bank([0.3], [0.1], 8, 4, cos_err_std=0.05)


def test_array_gain_known_values():
    assert array_gain(7, 0.0) == 7.0
    assert array_gain(2, 1.0) == pytest.approx(0.0, abs=1e-12)
    # hand evaluation: sin^2(pi/2) / (2 sin^2(pi/4)) = 1
    assert array_gain(2, 0.5) == pytest.approx(1.0, rel=1e-12)
    assert array_gain(5, 2.0) == 5.0   # periodic singularity resolved to the limit


@settings(max_examples=80, deadline=None)
@given(
    st.integers(min_value=1, max_value=128),
    st.floats(min_value=-3.0, max_value=3.0, allow_nan=False),
)
def test_array_gain_bounds(n, x):
    g = array_gain(n, x)
    assert -1e-12 <= g <= n + 1e-9


@pytest.mark.parametrize("n", [1, 2, 4, 64])
def test_mean_array_gain_against_adaptive_quadrature(n):
    oracle, err = integrate.quad(lambda x: array_gain(n, x), 0.0, 1.0, limit=50 * n + 50)
    assert err < 1e-9
    assert mean_array_gain(n) == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 7, 64, 333, 1024])
def test_mean_array_gain_is_exactly_one(n):
    assert abs(mean_array_gain(n) - 1.0) < 1e-9


def test_mean_array_gain_resolution_converged():
    assert mean_array_gain(17, nodes_per_lobe=32) == pytest.approx(
        mean_array_gain(17, nodes_per_lobe=64), abs=1e-12
    )


def test_project_channel_matched_and_cross_terms():
    m, varsigma = 16, 3.0
    cos_k, cos_i = 0.3, -0.2
    bank = build_bank([cos_k, cos_i], [0.0, 0.0], m, 1)
    amp = np.sqrt(varsigma / (varsigma + 1.0))
    h_row = amp * steering_from_cos(m, cos_k)   # pure-LOS single-antenna channel
    proj = project_channel(h_row, bank.F_rf)
    assert proj[0] == pytest.approx(amp, rel=1e-12)
    # cross entry equals the Dirichlet-kernel expression and sqrt(G_M/M)
    delta = cos_k - cos_i
    expected = amp * np.sin(m * np.pi * delta / 2) / (m * np.sin(np.pi * delta / 2))
    assert proj[1].real == pytest.approx(expected, rel=1e-9)
    assert abs(proj[1]) == pytest.approx(amp * np.sqrt(array_gain(m, delta) / m), rel=1e-9)


def test_project_channel_zero_row_and_dim_check():
    bank = build_bank([0.1], [0.0], 8, 1)
    assert np.all(project_channel(np.zeros(8, complex), bank.F_rf) == 0)
    with pytest.raises(ValueError):
        project_channel(np.zeros(7, complex), bank.F_rf)


def test_spatial_filter_mean_leakage_is_one_over_m():
    # |(1/sqrt(M)) h^T v|^2 for a unit-power LOS interferer averaged over
    # uniform cosines equals E[G_M]/M = 1/M
    m, draws = 16, 100_000
    rng = rng_for(12, 0)
    cos_int = rng.uniform(-1, 1, draws)
    cos_beam = rng.uniform(-1, 1, draws)
    rows = steering_from_cos(m, cos_int)
    beams = steering_from_cos(m, cos_beam).conj() / np.sqrt(m)
    proj = np.einsum("km,km->k", rows, beams) / np.sqrt(m)
    assert np.mean(np.abs(proj) ** 2) == pytest.approx(1.0 / m, rel=0.05)
