"""ZF downlink: precoding, per-user SINR decomposition, and the closed-form predictors.

The digital precoder inverts the estimated N x N equivalent channel; beta
normalizes total digital transmit power to one, so E_s is the per-symbol
transmit energy of the whole BS. Interference splits into the intra-cell
residual (driven by the estimation error) and the inter-cell term from
neighbor BSs' own normalized transmissions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RATE_CAP_BITS = float(np.log2(1.0 + 1e30))  # sentinel for interference-free limits


class NearSingularEstimate(ValueError):
    """Estimate too ill-conditioned for ZF; the trial is rejected and counted."""


@dataclass
class ZfPrecoder:
    w_eq: np.ndarray     # (N, N) right inverse of the estimated equivalent channel
    beta: float          # 1/sqrt(tr(W W^H))
    cond: float


def zf_precoder(h_eq_hat: np.ndarray, cond_limit: float = 1e8) -> ZfPrecoder:
    """Invert the square estimated equivalent channel and normalize power."""
    h_eq_hat = np.asarray(h_eq_hat)
    if h_eq_hat.shape[0] != h_eq_hat.shape[1]:
        raise ValueError("equivalent channel estimate must be square")
    cond = float(np.linalg.cond(h_eq_hat))
    if not np.isfinite(cond) or cond > cond_limit:
        raise NearSingularEstimate(f"condition number {cond:.3e} exceeds {cond_limit:.1e}")
    w_eq = np.linalg.inv(h_eq_hat)
    beta = 1.0 / math.sqrt(float(np.sum(np.abs(w_eq) ** 2)))
    return ZfPrecoder(w_eq=w_eq, beta=beta, cond=cond)


def beta_bar_sq(varsigma: float, m_bs: int, p_ue: int, n_users: int) -> float:
    """Large-antenna closed form of the squared power normalization factor."""
    return varsigma / (varsigma + 1.0) * m_bs * p_ue / n_users


@dataclass
class SinrSample:
    """One trial's per-user received power decomposition (linear Watts)."""

    desired: np.ndarray
    intra: np.ndarray
    inter: np.ndarray
    noise: float

    def sinr(self) -> np.ndarray:
        return self.desired / (self.intra + self.inter + self.noise)

    def rates(self) -> np.ndarray:
        return np.log2(1.0 + self.sinr())


def downlink_sinr(h_eq_true: np.ndarray, precoder: ZfPrecoder,
                  sigma_sq_ms: float, e_s: float,
                  inter_rows: np.ndarray | None = None,
                  inter_precoders: list[ZfPrecoder] | None = None) -> SinrSample:
    """Per-user SINR sample through the true channels.

    h_eq_true: (N, N) true equivalent channel (rows are users). inter_rows:
    (L, N, N) rows w_k^H H_{l,k}^T F_rf,l coupling desired user k to neighbor
    BS l's N streams; each is weighted by that cell's own normalized precoder.
    """
    n = h_eq_true.shape[0]
    coupling = h_eq_true @ (precoder.beta * precoder.w_eq)
    power = e_s * np.abs(coupling) ** 2
    desired = np.diag(power).copy()
    intra = power.sum(axis=1) - desired

    inter = np.zeros(n)
    if inter_rows is not None and len(inter_rows):
        for rows_l, prec_l in zip(inter_rows, inter_precoders):
            streams = rows_l @ (prec_l.beta * prec_l.w_eq)
            inter += e_s * np.sum(np.abs(streams) ** 2, axis=1)
    return SinrSample(desired=desired, intra=intra, inter=inter, noise=sigma_sq_ms)


@dataclass
class RateReport:
    """Per-user downlink outcome of one operating point."""

    per_user_rate: np.ndarray      # empirical, bits/s/Hz
    analytical_rate: np.ndarray    # closed-form prediction per user
    upper_bound: float             # single-cell benchmark
    terms: SinrSample              # averaged power decomposition

    def __post_init__(self):
        if np.any(np.asarray(self.per_user_rate) < 0):
            raise ValueError("rates must be nonnegative")

    def average_rate(self) -> float:
        return float(np.mean(self.per_user_rate))


def inter_cell_rows(inter_dl: np.ndarray, user_beams: np.ndarray, f_rf_l: np.ndarray) -> np.ndarray:
    """(N, N) coupling rows w_k^H H_{l,k}^T F_rf,l for one neighbor cell.

    inter_dl: (N, P, M) downlink channels from that BS to the desired users.
    """
    t = np.einsum("kp,kpm->km", user_beams.conj(), inter_dl)
    return t @ f_rf_l


# -- closed-form predictors ----------------------------------------------------

def lemma1_intra(rho_sq, varsigma: float, m_bs: int, p_ue: int, n_users: int,
                 beta_sq: float, gain: float, e_s: float) -> float:
    """Asymptotic intra-cell interference power under pilot contamination."""
    if m_bs < 1 or p_ue < 1:
        raise ValueError("antenna counts must be >= 1")
    x = float(np.sum(rho_sq)) / (m_bs * p_ue)
    mismatch = (math.sqrt(1.0 + x) - 1.0) ** 2
    leakage = (1.0 + x) * x * n_users * (varsigma + 1.0) / varsigma
    return beta_sq * gain * e_s * (mismatch + leakage)


def lemma2_inter(omega_tilde, e_s: float) -> float:
    """Asymptotic inter-cell interference power: E_s * sum of neighbor gains."""
    return e_s * float(np.sum(omega_tilde))


def theorem2_rate(xi_sq: float, zeta_sq_sum: float, varsigma: float,
                  m_bs: int, p_ue: int, n_users: int,
                  gain: float, e_s: float, sigma_sq_ms: float) -> float:
    """Closed-form per-user ZF rate: log2 of one plus the inverse total
    normalized interference (contamination mismatch + leakage + inter-cell +
    noise, all relative to the hardened desired power beta_bar^2 gain E_s)."""
    if m_bs < 1 or p_ue < 1:
        raise ValueError("antenna counts must be >= 1")
    x = xi_sq / (m_bs * p_ue)
    bbar_sq = beta_bar_sq(varsigma, m_bs, p_ue, n_users)
    a = (math.sqrt(1.0 + x) - 1.0) ** 2
    b = (1.0 + x) * n_users * (varsigma + 1.0) / (varsigma * m_bs * p_ue) * xi_sq
    c = (
        n_users * (varsigma + 1.0) / (varsigma * m_bs * p_ue) * zeta_sq_sum
        + sigma_sq_ms / (bbar_sq * gain * e_s)
    )
    total = a + b + c
    if total <= 0.0:
        return RATE_CAP_BITS
    return min(math.log2(1.0 + 1.0 / total), RATE_CAP_BITS)


def upper_bound_rate(m_bs: int, p_ue: int, n_users: int, varsigma: float,
                     e_s_eff: float, sigma_sq_ms: float) -> float:
    """Single-cell interference-free rate; e_s_eff is the received symbol
    energy (transmit E_s times the desired-link large-scale gain)."""
    bracket = m_bs * p_ue / n_users * varsigma / (varsigma + 1.0) + 1.0 / (varsigma + 1.0)
    snr = bracket * e_s_eff / sigma_sq_ms
    return min(math.log2(1.0 + snr), RATE_CAP_BITS)


def scaling_ratio(m_values, rates) -> np.ndarray:
    """Rate over log2(M) series, the scaling-law diagnostic."""
    m_values = np.asarray(m_values, dtype=float)
    if m_values.size < 3:
        raise ValueError("need at least 3 sweep points")
    if np.any(m_values <= 1):
        raise ValueError("scaling ratio undefined at M <= 1")
    return np.asarray(rates, dtype=float) / np.log2(m_values)
