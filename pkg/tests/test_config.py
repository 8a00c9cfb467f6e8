import math

import pytest

from mmcell.config import (
    ConfigError,
    ScenarioConfig,
    apply_overrides,
    dbm_to_watts,
    load_config,
    save_config,
    watts_to_dbm,
)


def test_dbm_roundtrip():
    assert dbm_to_watts(46.0) == pytest.approx(39.810717, rel=1e-6)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)
    assert watts_to_dbm(dbm_to_watts(17.3)) == pytest.approx(17.3)
    with pytest.raises(ValueError):
        watts_to_dbm(0.0)


@pytest.mark.parametrize("changes", [
    {"M": 4, "N": 10},                  # M < N
    {"N": 0},
    {"trials": 0},
    {"varsigma_intra": -1.0},
    {"E_P": 0.0},
    {"contamination_mode": "bogus"},
    {"xi_sq": -0.1},
    {"xi_sq": None},                    # explicit mode needs xi_sq
    {"isd_m": 0.0},
    {"aoa_cos_std": -0.5},
])
def test_invalid_configs_rejected(changes):
    with pytest.raises(ConfigError):
        ScenarioConfig(**changes)


def test_geometric_mode_allows_missing_xi_sq():
    cfg = ScenarioConfig(contamination_mode="geometric", xi_sq=None)
    assert cfg.xi_sq is None


def test_derived_energies():
    cfg = ScenarioConfig(N=10, max_tx_power_dbm=46.0)
    assert cfg.data_energy() == pytest.approx(dbm_to_watts(46.0))
    # unit-norm length-N pilots at the UE power knob: E_P = N * P_ue
    assert cfg.pilot_energy() == pytest.approx(10 * dbm_to_watts(46.0))
    cfg2 = cfg.replace(ue_tx_power_dbm=30.0, E_s=2.5)
    assert cfg2.pilot_energy() == pytest.approx(10 * dbm_to_watts(30.0))
    assert cfg2.data_energy() == 2.5


def test_thermal_noise_default_and_override():
    cfg = ScenarioConfig()
    assert cfg.noise_bs() == pytest.approx(250e6 * 1.38e-23 * 300.0)
    assert cfg.replace(sigma_sq_ms=1e-10).noise_ms() == 1e-10


def test_fingerprint_tracks_fields():
    a, b = ScenarioConfig(), ScenarioConfig()
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != a.replace(M=64).fingerprint()


def test_config_file_roundtrip(tmp_path):
    cfg = ScenarioConfig(M=96, P=7, xi_sq=0.2, contamination_mode="explicit_xi_sq",
                         ue_tx_power_dbm=None)
    path = tmp_path / "scenario.cfg"
    save_config(cfg, path)
    loaded = load_config(path)
    assert loaded == cfg


def test_config_file_overrides_and_comments(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("M = 64   # antennas\nN = 8\n\nseed = 99\n")
    cfg = load_config(path, overrides={"P": "6"})
    assert (cfg.M, cfg.N, cfg.P, cfg.seed) == (64, 8, 6, 99)


def test_config_file_rejects_unknown_keys_and_bad_lines(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("bogus_key = 3\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("just some text\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_apply_overrides_coerces_types():
    cfg = apply_overrides(ScenarioConfig(), {"M": "256", "xi_sq": "0.2",
                                             "varsigma_inter_dl": "none"})
    assert cfg.M == 256 and cfg.xi_sq == 0.2
    assert cfg.varsigma_inter_dl is None
    assert cfg.varsigma_dl() == cfg.varsigma_inter_ul


def test_bs_gain_linear():
    assert ScenarioConfig(bs_antenna_gain_dbi=14.0).bs_gain_linear() == pytest.approx(
        10 ** 1.4
    )
    assert math.isclose(ScenarioConfig(bs_antenna_gain_dbi=0.0).bs_gain_linear(), 1.0)
