"""Deployment geometry, empirical path loss, thermal noise, contamination coefficients.

The desired BS sits at the origin; L neighbor BSs occupy a ring of radius
isd_m. Cells are the regular hexagons of that layout (inradius isd/2), with
users dropped uniformly per cell subject to a minimum BS distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import BOLTZMANN, ScenarioConfig

SPEED_OF_LIGHT = 3e8  # m/s, as used by the empirical path-loss fit


@dataclass(frozen=True)
class PathLossModel:
    alpha_pl: float     # slope (dB per decade / 10)
    varrho_pl: float    # floating intercept coefficient
    carrier_hz: float


def path_loss(d, model: PathLossModel):
    """Linear large-scale gain at distance d [m] (scalar or array).

    10^(-(10 alpha log10 d + varrho log10(4 pi f_c / c)) / 10); strictly
    decreasing in d for alpha > 0.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("path_loss requires d > 0")
    intercept_db = model.varrho_pl * math.log10(4.0 * math.pi * model.carrier_hz / SPEED_OF_LIGHT)
    loss_db = 10.0 * model.alpha_pl * np.log10(d) + intercept_db
    out = 10.0 ** (-loss_db / 10.0)
    return float(out) if out.ndim == 0 else out


def noise_power(bandwidth_hz: float, temperature_k: float) -> float:
    """Thermal noise power B_W * k_B * T_k in Watts."""
    if bandwidth_hz <= 0 or temperature_k < 0:
        raise ValueError("bandwidth must be > 0 and temperature >= 0")
    return bandwidth_hz * BOLTZMANN * temperature_k


# -- hexagonal cells ----------------------------------------------------------

def hexagon_circumradius(isd_m: float) -> float:
    # adjacent cell centers are 2 * inradius apart; circumradius = inradius * 2/sqrt(3)
    return isd_m / math.sqrt(3.0)


def hexagon_mean_distance(circumradius: float, d_min: float = 0.0) -> float:
    """Mean distance from the center of a regular hexagon to a uniform point.

    With d_min > 0 the disk r < d_min is excluded (matching the user drop).
    Closed form over one 30-degree wedge: boundary at r(phi) = a / cos(phi)
    with apothem a = circumradius * sqrt(3)/2.
    """
    a = circumradius * math.sqrt(3.0) / 2.0
    if d_min >= a:
        raise ValueError("d_min must be smaller than the hexagon apothem")
    # numerator = int r^2 dr dphi, denominator = int r dr dphi on [0, pi/6]
    nodes, weights = np.polynomial.legendre.leggauss(64)
    phi = (nodes + 1.0) * (math.pi / 12.0)
    w = weights * (math.pi / 12.0)
    r_max = a / np.cos(phi)
    num = np.sum(w * (r_max**3 - d_min**3) / 3.0)
    den = np.sum(w * (r_max**2 - d_min**2) / 2.0)
    return float(num / den)


def sample_in_hexagon(rng: np.random.Generator, circumradius: float, d_min: float = 0.0) -> np.ndarray:
    """Uniform point in a flat-side-up hexagon centered at origin, r >= d_min.

    Orientation: flat sides face the +x/-x neighbor directions (vertices at
    90 and 270 degrees), matching neighbors placed on the ring at 2 pi l / L.
    """
    a = circumradius * math.sqrt(3.0) / 2.0
    while True:
        x = rng.uniform(-a, a)
        y = rng.uniform(-circumradius, circumradius)
        # inside test for vertex-up hexagon: |y| <= R - |x|/sqrt(3) region bounds
        if abs(y) > circumradius - abs(x) / math.sqrt(3.0):
            continue
        if x * x + y * y < d_min * d_min:
            continue
        return np.array([x, y])


@dataclass
class Deployment:
    bs_xy: np.ndarray        # (L+1, 2); row 0 = desired BS at origin
    user_xy: np.ndarray      # (L+1, N, 2)

    @property
    def n_cells(self) -> int:
        return self.bs_xy.shape[0]

    def serving_distances(self) -> np.ndarray:
        """(L+1, N) distance of each user to its own BS."""
        return np.linalg.norm(self.user_xy - self.bs_xy[:, None, :], axis=-1)

    def cross_distances(self, from_cell: int, to_cell: int) -> np.ndarray:
        """(N,) distances from users of `from_cell` to the BS of `to_cell`."""
        return np.linalg.norm(self.user_xy[from_cell] - self.bs_xy[to_cell], axis=-1)


def drop_deployment(cfg: ScenarioConfig, rng: np.random.Generator) -> Deployment:
    """Deterministic-for-a-given-stream drop of BS ring and per-cell users."""
    radius = hexagon_circumradius(cfg.isd_m)
    n_cells = cfg.L + 1
    bs_xy = np.zeros((n_cells, 2))
    for l in range(cfg.L):
        ang = 2.0 * math.pi * l / cfg.L
        bs_xy[l + 1] = (cfg.isd_m * math.cos(ang), cfg.isd_m * math.sin(ang))
    user_xy = np.empty((n_cells, cfg.N, 2))
    for c in range(n_cells):
        for k in range(cfg.N):
            user_xy[c, k] = bs_xy[c] + sample_in_hexagon(rng, radius, cfg.d_min_m)
    return Deployment(bs_xy=bs_xy, user_xy=user_xy)


# -- contamination / interference coefficients --------------------------------

@dataclass
class ContaminationCoefficients:
    """Large-scale ratios feeding both the simulator and the closed forms.

    rho_sq[l, k]: uplink contamination gain ratio of the pilot-k user in
    neighbor cell l (paper's rho-hat squared). zeta_sq[l, k]: downlink gain
    ratio of neighbor BS l at desired user k. ref_gain: common desired-link
    gain after long-term power control, BS antenna gain included.
    """

    rho_sq: np.ndarray
    zeta_sq: np.ndarray
    ref_gain: float

    def xi_sq_per_user(self) -> np.ndarray:
        return self.rho_sq.sum(axis=0)


def reference_gain(cfg: ScenarioConfig) -> float:
    """Common large-scale gain of desired users (long-term power control)."""
    model = PathLossModel(cfg.alpha_pl, cfg.varrho_pl, cfg.carrier_hz)
    if cfg.ref_distance_m is not None:
        d_ref = cfg.ref_distance_m
    else:
        d_ref = hexagon_mean_distance(hexagon_circumradius(cfg.isd_m), cfg.d_min_m)
    return cfg.bs_gain_linear() * path_loss(d_ref, model)


def contamination_coefficients(cfg: ScenarioConfig, deployment: Deployment) -> ContaminationCoefficients:
    """rho-hat^2 and zeta^2 sets for every desired user.

    explicit_xi_sq mode splits the configured xi^2 equally over the L
    neighbor cells (so sum_l rho^2 = xi^2 exactly); geometric mode derives
    rho^2 from user-to-desired-BS cross distances. zeta^2 always comes from
    the neighbor-BS-to-user geometry.
    """
    model = PathLossModel(cfg.alpha_pl, cfg.varrho_pl, cfg.carrier_hz)
    gain = cfg.bs_gain_linear()
    ref = reference_gain(cfg)

    zeta_sq = np.empty((cfg.L, cfg.N))
    for l in range(cfg.L):
        d = deployment.cross_distances(from_cell=0, to_cell=l + 1)
        zeta_sq[l] = gain * path_loss(d, model) / ref

    if cfg.contamination_mode == "explicit_xi_sq":
        rho_sq = np.full((cfg.L, cfg.N), (cfg.xi_sq / cfg.L) if cfg.L else 0.0)
        if cfg.L == 0:
            rho_sq = np.zeros((0, cfg.N))
    else:
        rho_sq = np.empty((cfg.L, cfg.N))
        for l in range(cfg.L):
            d = deployment.cross_distances(from_cell=l + 1, to_cell=0)
            rho_sq[l] = gain * path_loss(d, model) / ref

    return ContaminationCoefficients(rho_sq=rho_sq, zeta_sq=zeta_sq, ref_gain=ref)
