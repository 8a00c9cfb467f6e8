import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmcell.channel import (
    Channel,
    draw_channel_batch,
    dump_channels,
    load_channel_dump,
    sample_cos_angles,
    synth_intra,
    synth_inter_downlink,
    synth_inter_uplink,
    ula_response,
)
from mmcell.simulate import rng_for


def test_ula_broadside_is_all_ones():
    assert np.allclose(ula_response(4, np.pi / 2), np.ones(4))


def test_ula_endfire_alternates():
    assert np.allclose(ula_response(2, 0.0), [1.0, -1.0])


def test_ula_sixty_degrees_quarter_turns():
    # cos(pi/3) = 1/2 -> per-element phase -pi/2
    assert np.allclose(ula_response(4, np.pi / 3), [1.0, -1.0j, -1.0, 1.0j])


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=1, max_value=64),
    st.floats(min_value=0.0, max_value=np.pi, allow_nan=False),
)
def test_ula_entries_unit_modulus_first_entry_one(length, angle):
    v = ula_response(length, angle)
    assert v[0] == 1.0
    assert np.max(np.abs(np.abs(v) - 1.0)) < 1e-12


def test_sample_cos_angles_moments_and_determinism():
    rng = rng_for(1, 2)
    draws = sample_cos_angles(rng, 100_000)
    assert abs(draws.mean()) < 0.01
    assert abs(draws.var() - 1 / 3) / (1 / 3) < 0.02
    again = sample_cos_angles(rng_for(1, 2), 100_000)
    assert np.array_equal(draws, again)


def test_pure_strongest_path_is_rank_one_with_full_energy():
    m, p = 16, 4
    ch = synth_intra(m, p, gain=1.0, varsigma=1e12, n_clusters=8, rng=rng_for(2, 0))
    s = np.linalg.svd(ch.H, compute_uv=False)
    assert s[1] / s[0] < 1e-5
    assert np.sum(np.abs(ch.H) ** 2) == pytest.approx(m * p, rel=1e-6)


def test_zero_gain_gives_zero_matrix():
    ch = synth_intra(8, 2, gain=0.0, varsigma=4.0, n_clusters=4, rng=rng_for(2, 1))
    assert np.all(ch.H == 0)


@pytest.mark.parametrize("varsigma", [0.0, 2.0, 5.0])
@pytest.mark.parametrize("kind", ["intra", "inter_ul", "inter_dl"])
def test_mean_frobenius_energy_is_gain_m_p(varsigma, kind):
    m, p, gain, draws = 16, 4, 2.5, 4000
    rng = rng_for(3, hash(kind) % 1000, int(varsigma))
    batch = draw_channel_batch(np.full(draws, gain), varsigma, 8, rng)
    mats = batch.matrices(m, p)
    energy = np.mean(np.sum(np.abs(mats) ** 2, axis=(1, 2)))
    assert energy == pytest.approx(gain * m * p, rel=0.03)


def test_strongest_path_energy_fraction():
    # the strongest-AoA component is deterministic: ||rank-1||_F^2 = M P
    m, p, varsigma = 32, 8, 3.0
    batch = draw_channel_batch(np.full(2000, 1.0), varsigma, 8, rng_for(4, 0))
    w = batch.component_weights()
    saoa = np.abs(w[:, 0]) ** 2 * m * p
    total = np.mean(np.sum(np.abs(batch.matrices(m, p)) ** 2, axis=(1, 2)))
    assert np.mean(saoa) / total == pytest.approx(varsigma / (varsigma + 1), rel=0.03)


def test_inter_kinds_share_construction_statistics():
    m, p = 12, 3
    ul = draw_channel_batch(np.full(3000, 1.0), 2.0, 8, rng_for(5, 0))
    intra = draw_channel_batch(np.full(3000, 1.0), 2.0, 8, rng_for(5, 1))
    e_ul = np.mean(np.sum(np.abs(ul.matrices(m, p)) ** 2, axis=(1, 2)))
    e_in = np.mean(np.sum(np.abs(intra.matrices(m, p)) ** 2, axis=(1, 2)))
    assert e_ul == pytest.approx(e_in, rel=0.05)


def test_downlink_channel_is_transposed():
    ch = synth_inter_downlink(16, 4, gain=1.0, varsigma=2.0, n_clusters=8, rng=rng_for(6, 0))
    assert ch.H.shape == (4, 16)
    ul = synth_inter_uplink(16, 4, gain=1.0, varsigma=2.0, n_clusters=8, rng=rng_for(6, 0))
    assert np.allclose(ch.H, ul.H.T)


def test_channel_draws_reproducible_and_batch_matches_loop():
    rng = rng_for(7, 0)
    batch = draw_channel_batch(np.array([1.0, 2.0]), np.array([4.0, 0.5]), 6, rng)
    mats = batch.matrices(8, 3)
    again = draw_channel_batch(np.array([1.0, 2.0]), np.array([4.0, 0.5]), 6, rng_for(7, 0))
    assert np.array_equal(mats, again.matrices(8, 3))


def test_effective_uplink_equals_matrix_product():
    rng = rng_for(8, 0)
    batch = draw_channel_batch(np.full(5, 1.3), 2.0, 8, rng)
    beams = (rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))) / np.sqrt(2)
    direct = np.einsum("kmp,kp->km", batch.matrices(16, 4), beams.conj())
    assert np.allclose(batch.effective_uplink(16, beams), direct, atol=1e-12)


def test_channel_set_dimensions_consistent():
    from mmcell.channel import draw_channel_set

    m, p, n, l_cells = 12, 3, 4, 2
    cs = draw_channel_set(
        m, p, n, 4,
        intra_gains=1.0, intra_ratio=4.0,
        ul_gains=np.full((l_cells, n), 0.01), ul_ratio=2.0,
        dl_gains=np.full((l_cells, n), 0.1), dl_ratio=2.0,
        rng=rng_for(10, 0),
    )
    cs.check_dimensions(m, p)
    assert len(cs.intra) == n and len(cs.inter_ul) == l_cells


def test_channel_dump_roundtrip(tmp_path):
    chans = [
        synth_intra(8, 2, 1.0, 4.0, 4, rng_for(9, i)) for i in range(3)
    ]
    path = tmp_path / "trial0.chdump"
    dump_channels(chans, path, seed=9)
    header, mats = load_channel_dump(path)
    assert header["seed"] == 9 and header["count"] == 3
    for ch, mat in zip(chans, mats):
        assert isinstance(ch, Channel)
        assert mat.shape == ch.H.shape
        assert np.allclose(mat, ch.H, atol=1e-6)  # complex64 payload
