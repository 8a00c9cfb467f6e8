"""Random mmWave channel synthesis: strongest-AoA rank-1 term plus scattered clusters.

Every channel is sqrt(gain*ratio/(ratio+1)) * a_bs a_ms^H
             + sqrt(gain/(ratio+1)) * (1/sqrt(C)) sum_i alpha_i a_bs,i a_ms,i^H
with unit-modulus ULA steering vectors and alpha_i ~ CN(0,1). Angle cosines
(not the angles) are uniform on [-1, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def steering_from_cos(length: int, cos_angle) -> np.ndarray:
    """ULA response e^{-j pi m cos(theta)}, m = 0..length-1 (d = lambda/2).

    cos_angle may be scalar or any array shape; the antenna axis is appended.
    """
    if length < 1:
        raise ValueError("array length must be >= 1")
    cos_angle = np.asarray(cos_angle, dtype=float)
    m = np.arange(length)
    return np.exp(-1j * np.pi * cos_angle[..., None] * m)


def ula_response(length: int, angle: float) -> np.ndarray:
    """Array response vector for an incidence angle in [0, pi]."""
    return steering_from_cos(length, np.cos(angle))


def sample_cos_angles(rng: np.random.Generator, size) -> np.ndarray:
    """Strongest-AoA / cluster angle cosines, uniform on [-1, 1]."""
    return rng.uniform(-1.0, 1.0, size=size)


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """CN(0, 1) samples: independent real/imag normals scaled by 1/sqrt(2)."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


@dataclass
class ChannelBatch:
    """All randomness of K channels sharing (n_clusters); matrices built on demand.

    Column 0 of the cosine arrays is the strongest AoA; columns 1.. are the
    scattering clusters.
    """

    gains: np.ndarray          # (K,) large-scale gains
    ratios: np.ndarray         # (K,) strongest-to-scattered power ratios
    bs_cos: np.ndarray         # (K, 1 + C)
    ms_cos: np.ndarray         # (K, 1 + C)
    cluster_gains: np.ndarray  # (K, C) complex CN(0,1)

    def __len__(self) -> int:
        return self.gains.shape[0]

    def component_weights(self) -> np.ndarray:
        """(K, 1 + C) complex weights of each rank-1 component."""
        w_saoa = np.sqrt(self.gains * self.ratios / (self.ratios + 1.0))
        w_scat = np.sqrt(self.gains / (self.ratios + 1.0) / self.cluster_gains.shape[1])
        return np.concatenate(
            [w_saoa[:, None].astype(complex), w_scat[:, None] * self.cluster_gains], axis=1
        )

    def matrices(self, m_bs: int, p_ue: int) -> np.ndarray:
        """(K, M, P) uplink-oriented matrices (BS rows, user columns)."""
        w = self.component_weights()
        a_bs = steering_from_cos(m_bs, self.bs_cos)          # (K, 1+C, M)
        a_ms = steering_from_cos(p_ue, self.ms_cos)          # (K, 1+C, P)
        return np.einsum("kc,kcm,kcp->kmp", w, a_bs, a_ms.conj(), optimize=True)

    def effective_uplink(self, m_bs: int, transmit_beams: np.ndarray) -> np.ndarray:
        """(K, M) vectors H_k @ conj(w_k) without materializing the matrices.

        transmit_beams holds rows w_k of shape (K, P); the user-side factor of
        each rank-1 component collapses to the scalar a_ms^H w^*.
        """
        w = self.component_weights()
        a_ms = steering_from_cos(transmit_beams.shape[1], self.ms_cos)
        ms_scalar = np.einsum("kcp,kp->kc", a_ms.conj(), transmit_beams.conj())
        a_bs = steering_from_cos(m_bs, self.bs_cos)
        return np.einsum("kc,kc,kcm->km", w, ms_scalar, a_bs, optimize=True)


def draw_channel_batch(gains, ratios, n_clusters: int, rng: np.random.Generator) -> ChannelBatch:
    """Draw K channels' angles and cluster gains in a fixed, documented order.

    Order per batch: BS cosines block, user cosines block, cluster gains
    (real then imag interleaved by complex_normal).
    """
    gains = np.atleast_1d(np.asarray(gains, dtype=float))
    ratios = np.broadcast_to(np.asarray(ratios, dtype=float), gains.shape).copy()
    if np.any(gains < 0) or np.any(ratios < 0):
        raise ValueError("gains and ratios must be >= 0")
    k = gains.shape[0]
    bs_cos = sample_cos_angles(rng, (k, 1 + n_clusters))
    ms_cos = sample_cos_angles(rng, (k, 1 + n_clusters))
    cluster_gains = complex_normal(rng, (k, n_clusters))
    return ChannelBatch(gains, ratios, bs_cos, ms_cos, cluster_gains)


@dataclass
class Channel:
    """One synthesized channel with its matrix and the draws that produced it."""

    H: np.ndarray              # (M, P) for uplink kinds, (P, M) for downlink
    gain: float
    ratio: float
    bs_cos: np.ndarray         # (1 + C,), [0] = strongest AoA at the BS side
    ms_cos: np.ndarray
    cluster_gains: np.ndarray


def _synth_single(m_bs, p_ue, gain, ratio, n_clusters, rng, transpose=False) -> Channel:
    batch = draw_channel_batch([gain], ratio, n_clusters, rng)
    h = batch.matrices(m_bs, p_ue)[0]
    return Channel(
        H=h.T.copy() if transpose else h,
        gain=float(gain),
        ratio=float(ratio),
        bs_cos=batch.bs_cos[0],
        ms_cos=batch.ms_cos[0],
        cluster_gains=batch.cluster_gains[0],
    )


def synth_intra(m_bs: int, p_ue: int, gain: float, varsigma: float,
                n_clusters: int, rng: np.random.Generator) -> Channel:
    """Desired-cell uplink channel H_k, shape (M, P)."""
    return _synth_single(m_bs, p_ue, gain, varsigma, n_clusters, rng)


def synth_inter_uplink(m_bs: int, p_ue: int, gain: float, varsigma: float,
                       n_clusters: int, rng: np.random.Generator) -> Channel:
    """Neighbor-cell user -> desired BS channel U_{l,k}, shape (M, P)."""
    return _synth_single(m_bs, p_ue, gain, varsigma, n_clusters, rng)


def synth_inter_downlink(m_bs: int, p_ue: int, gain: float, varsigma: float,
                         n_clusters: int, rng: np.random.Generator) -> Channel:
    """Neighbor BS -> desired user channel, stored transposed with shape (P, M)."""
    return _synth_single(m_bs, p_ue, gain, varsigma, n_clusters, rng, transpose=True)


@dataclass
class ChannelSet:
    """One trial's worth of desired-cell-centric channels."""

    intra: list[Channel]             # N desired-user channels, (M, P)
    inter_ul: list[list[Channel]]    # [L][N] contaminators into the desired BS
    inter_dl: list[list[Channel]]    # [L][N] neighbor-BS-to-user channels, (P, M)

    def check_dimensions(self, m_bs: int, p_ue: int) -> None:
        for ch in self.intra:
            assert ch.H.shape == (m_bs, p_ue)
        for row in self.inter_ul:
            assert len(row) == len(self.intra)
            for ch in row:
                assert ch.H.shape == (m_bs, p_ue)
        for row in self.inter_dl:
            for ch in row:
                assert ch.H.shape == (p_ue, m_bs)


def draw_channel_set(m_bs: int, p_ue: int, n_users: int, n_clusters: int,
                     intra_gains, intra_ratio, ul_gains, ul_ratio,
                     dl_gains, dl_ratio, rng: np.random.Generator) -> ChannelSet:
    """Materialize one trial's channels; gains are scalars or (L, N) arrays."""
    intra_gains = np.broadcast_to(np.asarray(intra_gains, dtype=float), (n_users,))
    ul_gains = np.atleast_2d(np.asarray(ul_gains, dtype=float))
    dl_gains = np.atleast_2d(np.asarray(dl_gains, dtype=float))
    intra = [
        synth_intra(m_bs, p_ue, g, intra_ratio, n_clusters, rng) for g in intra_gains
    ]
    inter_ul = [
        [synth_inter_uplink(m_bs, p_ue, g, ul_ratio, n_clusters, rng) for g in row]
        for row in ul_gains
    ]
    inter_dl = [
        [synth_inter_downlink(m_bs, p_ue, g, dl_ratio, n_clusters, rng) for g in row]
        for row in dl_gains
    ]
    return ChannelSet(intra=intra, inter_ul=inter_ul, inter_dl=inter_dl)


def dump_channels(channels: list[Channel], path: str | Path, seed: int) -> None:
    """Debug dump: one JSON header line, then little-endian complex64 payload."""
    path = Path(path)
    header = {
        "seed": seed,
        "count": len(channels),
        "dims": [list(ch.H.shape) for ch in channels],
    }
    with path.open("wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        for ch in channels:
            fh.write(np.ascontiguousarray(ch.H.astype("<c8")).tobytes())


def load_channel_dump(path: str | Path) -> tuple[dict, list[np.ndarray]]:
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode())
        mats = []
        for dims in header["dims"]:
            n = int(np.prod(dims))
            buf = fh.read(8 * n)
            mats.append(np.frombuffer(buf, dtype="<c8").reshape(dims))
    return header, mats
