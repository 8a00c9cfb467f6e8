"""Uplink pilot phase: contaminated reception, equivalent-channel estimate, NMSE.

Pilot reuse across cells means the pilot-k correlation at the desired BS picks
up, besides user k's own equivalent row, exactly the same-pilot users of every
neighbor cell plus effective noise; the estimate decomposes as
hat(H)_eq^T = B (H_eq^T + Delta) with Delta = contamination + noise / sqrt(E_P).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import BeamformerBank
from .channel import complex_normal


@dataclass
class PilotBook:
    """Unitary pilot matrix; column i is user i's length-N sequence."""

    phi: np.ndarray

    @property
    def n(self) -> int:
        return self.phi.shape[0]


def build_pilots(n: int) -> PilotBook:
    """Normalized DFT book: orthonormal columns, first column all-ones/sqrt(N)."""
    if n < 1:
        raise ValueError("need at least one pilot")
    grid = np.arange(n)
    phi = np.exp(-2j * np.pi * np.outer(grid, grid) / n) / np.sqrt(n)
    return PilotBook(phi=phi)


def effective_uplink_vectors(channels: np.ndarray, beams: np.ndarray) -> np.ndarray:
    """(..., M) vectors H @ conj(w) for stacked (..., M, P) channels."""
    return np.einsum("...mp,...p->...m", channels, beams.conj())


def true_equivalent(intra: np.ndarray, user_beams: np.ndarray, f_rf: np.ndarray) -> np.ndarray:
    """Noise/contamination-free equivalent matrix; row k = w_k^H H_k^T F_rf."""
    g = effective_uplink_vectors(intra, user_beams)
    return g @ f_rf


def uplink_receive(intra: np.ndarray, bank: BeamformerBank, pilots: PilotBook,
                   e_p: float, sigma_sq_bs: float, rng: np.random.Generator,
                   inter_ul: np.ndarray | None = None,
                   inter_beams: np.ndarray | None = None) -> np.ndarray:
    """Per-RF-chain received pilot rows at the desired BS, shape (N_rf, N_sym).

    intra: (N, M, P) desired channels; inter_ul: (L, N, M, P) same-pilot
    contaminators with their own transmit beams inter_beams (L, N, P). Noise
    entries are i.i.d. CN(0, sigma_sq_bs) before analog combining.
    """
    m_bs = intra.shape[1]
    g = effective_uplink_vectors(intra, bank.w)
    if inter_ul is not None and inter_ul.size:
        g = g + effective_uplink_vectors(inter_ul, inter_beams).sum(axis=0)
    block = np.sqrt(e_p) * (g.T @ pilots.phi.T)
    if sigma_sq_bs > 0.0:
        block = block + np.sqrt(sigma_sq_bs) * complex_normal(rng, (m_bs, pilots.n))
    return bank.F_rf.T @ block


@dataclass
class EquivalentChannelEstimate:
    h_eq_true: np.ndarray    # (N, N), rows w_k^H H_k^T F_rf
    h_eq_hat: np.ndarray     # (N, N), path-loss compensated estimate
    delta: np.ndarray        # (N, N), contamination + effective noise (pre-B)
    b_diag: np.ndarray       # (N,), diagonal of the compensation matrix

    def reconstruction_error(self) -> float:
        recon = self.b_diag[:, None] * (self.h_eq_true + self.delta)
        return float(np.max(np.abs(recon - self.h_eq_hat)))


def estimate_equivalent(received: np.ndarray, pilots: PilotBook, e_p: float,
                        b_diag: np.ndarray, h_eq_true: np.ndarray) -> EquivalentChannelEstimate:
    """Pilot-correlate the received rows into the compensated N x N estimate.

    The simulator owns the ground truth, so the error block is extracted
    exactly rather than approximated.
    """
    b_diag = np.asarray(b_diag, dtype=float)
    if np.any(~np.isfinite(b_diag)) or np.any(b_diag <= 0.0):
        raise ValueError("compensation diagonal must be positive and finite")
    corr = received @ pilots.phi.conj()          # [chain i, pilot k]
    raw = corr.T / np.sqrt(e_p)                  # row k = user k across chains
    return EquivalentChannelEstimate(
        h_eq_true=h_eq_true,
        h_eq_hat=b_diag[:, None] * raw,
        delta=raw - h_eq_true,
        b_diag=b_diag,
    )


def empirical_nmse(deltas: np.ndarray, b_diag: np.ndarray, m_bs: int, p_ue: int) -> np.ndarray:
    """Per-RF-chain normalized MSE from stacked (T, N, N) error blocks.

    Row-k error energy after compensation, averaged over trials and
    normalized by N*M*P.
    """
    deltas = np.asarray(deltas)
    if deltas.ndim == 2:
        deltas = deltas[None]
    n = deltas.shape[1]
    energy = np.mean(np.sum(np.abs(deltas) ** 2, axis=2), axis=0)  # (N,)
    return (np.asarray(b_diag) ** 2) * energy / (n * m_bs * p_ue)


def analytical_nmse(rho_sq, gain: float, e_p: float, sigma_sq_bs: float,
                    m_bs: int, p_ue: int) -> float:
    """Closed-form NMSE: contamination energy over MP plus the noise term."""
    if m_bs < 1 or p_ue < 1:
        raise ValueError("antenna counts must be >= 1")
    xi_sq = float(np.sum(rho_sq))
    return xi_sq / (m_bs * p_ue) + sigma_sq_bs / (gain * e_p * m_bs * p_ue)


@dataclass
class NmseReport:
    empirical: np.ndarray    # (N,) per RF chain
    analytical: np.ndarray   # (N,) closed-form prediction per RF chain
    m_bs: int
    p_ue: int
    xi_sq: float
    est_snr: float           # gain * E_P / sigma^2_BS at the estimator input

    def __post_init__(self):
        self.empirical = np.atleast_1d(np.asarray(self.empirical, dtype=float))
        self.analytical = np.atleast_1d(np.asarray(self.analytical, dtype=float))
        if np.any(self.empirical < 0) or np.any(self.analytical < 0):
            raise ValueError("NMSE values must be nonnegative")


# -- fully-digital LS baseline -------------------------------------------------

def ls_estimate_fully_digital(intra: np.ndarray, user_beams: np.ndarray,
                              pilots: PilotBook, e_p: float, sigma_sq_bs: float,
                              rng: np.random.Generator,
                              inter_ul: np.ndarray | None = None,
                              inter_beams: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """LS estimate of the per-user effective M-vectors at a fully digital BS.

    Returns (g_hat, g_true), both (N, M). The BS observes all M antennas, so
    the pilot-k correlation keeps the full contamination vector: its energy
    does not shrink with M, unlike the hybrid estimator's.
    """
    m_bs = intra.shape[1]
    g_true = effective_uplink_vectors(intra, user_beams)
    g_rx = g_true
    if inter_ul is not None and inter_ul.size:
        g_rx = g_rx + effective_uplink_vectors(inter_ul, inter_beams).sum(axis=0)
    block = np.sqrt(e_p) * (g_rx.T @ pilots.phi.T)
    if sigma_sq_bs > 0.0:
        block = block + np.sqrt(sigma_sq_bs) * complex_normal(rng, (m_bs, pilots.n))
    g_hat = (block @ pilots.phi.conj()).T / np.sqrt(e_p)
    return g_hat, g_true


def ls_normalized_error(g_hat: np.ndarray, g_true: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-user (error energy, reference energy) pairs for NMSE accumulation."""
    err = np.sum(np.abs(g_hat - g_true) ** 2, axis=-1)
    ref = np.sum(np.abs(g_true) ** 2, axis=-1)
    return err, ref
