"""Experiment configuration: validated scenario parameters plus file/CLI loading.

All internal math runs on linear Watts; dBm/dBi conversions happen here and
nowhere else.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

BOLTZMANN = 1.38e-23  # J/K

CONTAMINATION_MODES = ("explicit_xi_sq", "geometric")


class ConfigError(ValueError):
    """Raised when a ScenarioConfig violates its invariants."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(watts * 1000.0)


def dbi_to_linear(dbi: float) -> float:
    return 10.0 ** (dbi / 10.0)


@dataclass
class ScenarioConfig:
    """Full parameterization of one multi-cell experiment.

    Energies E_P / E_s are per-symbol linear Watts. When left as None they are
    derived from the dBm power knobs (E_s = BS max power; E_P = N * UE power so
    the per-symbol pilot power of a unit-norm length-N sequence equals the UE
    power).
    """

    L: int = 6                 # neighboring cells
    N: int = 10                # users per cell (= RF chains at the BS)
    M: int = 128               # BS antennas per RF chain
    P: int = 10                # antennas per user

    E_P: float | None = None   # pilot symbol energy [W], None -> derived
    E_s: float | None = None   # data symbol energy [W], None -> derived
    max_tx_power_dbm: float = 46.0
    ue_tx_power_dbm: float | None = None   # None -> max_tx_power_dbm
    bs_antenna_gain_dbi: float = 14.0

    varsigma_intra: float = 4.0        # strongest-path power ratio, desired cell
    varsigma_inter_ul: float = 2.0     # uplink inter-cell ratio
    varsigma_inter_dl: float | None = None  # None -> varsigma_inter_ul
    n_clusters: int = 8

    xi_sq: float | None = 0.01         # total contamination energy sum_l rho^2
    contamination_mode: str = "explicit_xi_sq"

    alpha_pl: float = 1.9              # path-loss slope
    varrho_pl: float = 20.0            # path-loss intercept coefficient
    carrier_hz: float = 28e9
    bandwidth_hz: float = 250e6
    temperature_k: float = 300.0

    isd_m: float = 200.0
    d_min_m: float = 10.0              # keeps the path-loss fit in range
    ref_distance_m: float | None = None  # None -> mean user distance in the hexagon

    sigma_sq_bs: float | None = None   # None -> thermal noise power
    sigma_sq_ms: float | None = None

    aoa_cos_std: float = 0.0           # beam misalignment knob, 0 = perfect AoA

    trials: int = 2000
    seed: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.L < 0:
            raise ConfigError("L must be >= 0")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.M < self.N:
            raise ConfigError("M must be >= N (one beam per RF chain)")
        if self.P < 1:
            raise ConfigError("P must be >= 1")
        if self.n_clusters < 1:
            raise ConfigError("n_clusters must be >= 1")
        for name in ("varsigma_intra", "varsigma_inter_ul"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.varsigma_inter_dl is not None and self.varsigma_inter_dl < 0:
            raise ConfigError("varsigma_inter_dl must be >= 0")
        if self.E_P is not None and self.E_P <= 0:
            raise ConfigError("E_P must be > 0")
        if self.E_s is not None and self.E_s <= 0:
            raise ConfigError("E_s must be > 0")
        if self.contamination_mode not in CONTAMINATION_MODES:
            raise ConfigError(f"contamination_mode must be one of {CONTAMINATION_MODES}")
        if self.contamination_mode == "explicit_xi_sq":
            if self.xi_sq is None:
                raise ConfigError("explicit_xi_sq mode requires xi_sq")
            if self.xi_sq < 0:
                raise ConfigError("xi_sq must be >= 0")
        if self.alpha_pl < 0 or self.carrier_hz <= 0:
            raise ConfigError("path-loss model parameters out of range")
        if self.bandwidth_hz <= 0 or self.temperature_k < 0:
            raise ConfigError("noise model parameters out of range")
        if self.isd_m <= 0 or self.d_min_m < 0:
            raise ConfigError("deployment distances out of range")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.aoa_cos_std < 0:
            raise ConfigError("aoa_cos_std must be >= 0")

    # -- derived quantities -------------------------------------------------

    def pilot_energy(self) -> float:
        if self.E_P is not None:
            return self.E_P
        ue_dbm = self.ue_tx_power_dbm if self.ue_tx_power_dbm is not None else self.max_tx_power_dbm
        return self.N * dbm_to_watts(ue_dbm)

    def data_energy(self) -> float:
        if self.E_s is not None:
            return self.E_s
        return dbm_to_watts(self.max_tx_power_dbm)

    def bs_gain_linear(self) -> float:
        return dbi_to_linear(self.bs_antenna_gain_dbi)

    def thermal_noise_w(self) -> float:
        return self.bandwidth_hz * BOLTZMANN * self.temperature_k

    def noise_bs(self) -> float:
        return self.sigma_sq_bs if self.sigma_sq_bs is not None else self.thermal_noise_w()

    def noise_ms(self) -> float:
        return self.sigma_sq_ms if self.sigma_sq_ms is not None else self.thermal_noise_w()

    def varsigma_dl(self) -> float:
        return self.varsigma_inter_dl if self.varsigma_inter_dl is not None else self.varsigma_inter_ul

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def fingerprint(self) -> str:
        """Short stable hash of every field, for CSV provenance."""
        parts = [f"{f.name}={getattr(self, f.name)!r}" for f in dataclasses.fields(self)]
        return hashlib.sha256(";".join(parts).encode()).hexdigest()[:12]


# -- key = value config files and CLI overrides ------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _coerce(name: str, raw: str):
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key: {name!r}")
    raw = raw.strip()
    if raw.lower() in ("none", "null"):
        return None
    ftype = _FIELDS[name].type
    if "str" in ftype:
        return raw
    if ftype.startswith("int"):
        return int(raw)
    return float(raw)


def load_config(path: str | Path, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Parse a `key = value` config file, then apply string-valued overrides."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, raw)
    return ScenarioConfig(**values)


def apply_overrides(cfg: ScenarioConfig, overrides: dict[str, str]) -> ScenarioConfig:
    changes = {key: _coerce(key, raw) for key, raw in overrides.items()}
    return cfg.replace(**changes)


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in dataclasses.fields(ScenarioConfig)]
    Path(path).write_text("\n".join(lines) + "\n")
