"""Strongest-AoA analog beamformers and the ULA array-gain kernel.

The BS uses one matched column per RF chain, v_k = conj(a_M(theta_k))/sqrt(M),
so that v_k^T a_M(theta_k) = sqrt(M); users use the same construction with P
antennas. The squared normalized beam pattern is the array-gain kernel
G_n[x] = sin^2(n pi x / 2) / (n sin^2(pi x / 2)), whose mean over x ~ U[-1,1]
is exactly 1 for every n (the contamination-decay workhorse).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import steering_from_cos


@dataclass
class BeamformerBank:
    """Analog beams of one cell: BS matrix F_rf (M, N) and user vectors w (N, P)."""

    F_rf: np.ndarray
    w: np.ndarray            # rows are the per-user vectors w_k
    bs_cos: np.ndarray       # (N,) cosines the BS columns point at
    ms_cos: np.ndarray       # (N,) cosines the user vectors point at


def build_bank(bs_cos, ms_cos, m_bs: int, p_ue: int,
               cos_err_std: float = 0.0, rng: np.random.Generator | None = None) -> BeamformerBank:
    """Matched-filter bank from the (perfectly known) strongest-AoA cosines.

    cos_err_std > 0 adds Gaussian misalignment to every cosine before the
    beams are built; the default 0 is the perfect-AoA operating point.
    """
    bs_cos = np.atleast_1d(np.asarray(bs_cos, dtype=float)).copy()
    ms_cos = np.atleast_1d(np.asarray(ms_cos, dtype=float)).copy()
    if cos_err_std > 0.0:
        if rng is None:
            raise ValueError("cos_err_std > 0 requires an rng")
        bs_cos = bs_cos + rng.normal(0.0, cos_err_std, bs_cos.shape)
        ms_cos = ms_cos + rng.normal(0.0, cos_err_std, ms_cos.shape)
    f_rf = steering_from_cos(m_bs, bs_cos).conj().T / np.sqrt(m_bs)   # (M, N)
    w = steering_from_cos(p_ue, ms_cos).conj() / np.sqrt(p_ue)        # (N, P)
    return BeamformerBank(F_rf=f_rf, w=w, bs_cos=bs_cos, ms_cos=ms_cos)


def array_gain(n: int, x):
    """G_n[x] = sin^2(n pi x/2) / (n sin^2(pi x/2)); the limit n at x in 2Z."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = np.asarray(x, dtype=float)
    half = np.sin(np.pi * x / 2.0)
    singular = np.isclose(half, 0.0, atol=1e-15)
    denom = np.where(singular, 1.0, half)
    g = np.sin(n * np.pi * x / 2.0) ** 2 / (n * denom**2)
    out = np.where(singular, float(n), g)
    return float(out) if out.ndim == 0 else out


def mean_array_gain(n: int, nodes_per_lobe: int = 32) -> float:
    """(1/2) * integral of G_n over [-1, 1] by per-lobe Gauss-Legendre.

    The integrand is even, so we integrate over [0, 1] split at the pattern
    nulls x = 2k/n where the adaptive error would otherwise concentrate.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    edges = np.unique(np.concatenate([np.arange(0, n // 2 + 1) * 2.0 / n, [1.0]]))
    edges = edges[edges <= 1.0 + 1e-12]
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_lobe)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half_w = (hi + lo) / 2.0, (hi - lo) / 2.0
        total += half_w * np.sum(weights * array_gain(n, mid + half_w * nodes))
    return float(total)


def project_channel(h_row: np.ndarray, f_rf: np.ndarray) -> np.ndarray:
    """Normalized projection (1/sqrt(M)) h^T F_rf of a 1 x M channel row.

    For a pure-LOS single-antenna channel the i-th entry reduces to the
    Dirichlet kernel sin(M pi d/2)/(M sin(pi d/2)) in d = cos difference.
    """
    h_row = np.asarray(h_row)
    m_bs = f_rf.shape[0]
    if h_row.shape[-1] != m_bs:
        raise ValueError(f"channel row has {h_row.shape[-1]} entries, F_rf expects {m_bs}")
    return (h_row @ f_rf) / np.sqrt(m_bs)
