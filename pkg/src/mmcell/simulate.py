"""Trial engine: per-trial scene synthesis, pilot phase, precoding, SINR terms.

Trials are pure functions of (config, stream key, trial index); the per-trial
substream is derived from the master seed so any worker count and any chunking
reproduce identical numbers. Within a trial the pilot-phase randomness is
drawn once and reused across a transmit-power sweep (only the noise scale and
the symbol energies change with power).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamformerBank, build_bank
from .channel import ChannelBatch, complex_normal, draw_channel_batch, sample_cos_angles, steering_from_cos
from .config import ScenarioConfig
from .downlink import NearSingularEstimate, SinrSample, ZfPrecoder, zf_precoder
from .estimation import PilotBook, build_pilots
from .geometry import ContaminationCoefficients

# fixed stream tags keep independent experiments on disjoint substreams
TAG_DEPLOY = 11
TAG_NMSE = 21
TAG_RATE = 31

ZF_COND_LIMIT = 1e8


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Generator on the substream (seed, *key); stable across processes."""
    return np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, *key)))


def worker_count(default: int = 1) -> int:
    """Worker pool size; MMCELL_WORKERS overrides, result-invariant either way."""
    raw = os.environ.get("MMCELL_WORKERS", "")
    try:
        return max(1, int(raw)) if raw else default
    except ValueError:
        return default


@dataclass
class CellScene:
    """One cell's uplink randomness: own users plus same-pilot contaminators."""

    intra: ChannelBatch
    bank: BeamformerBank
    contam: ChannelBatch | None
    contam_beams: np.ndarray | None   # (L*N, P) transmit beams toward own BSs


def draw_cell_scene(m_bs: int, p_ue: int, n_users: int, n_clusters: int,
                    gain: float, varsigma_intra: float,
                    contam_gains: np.ndarray | None, varsigma_inter: float,
                    rng: np.random.Generator, aoa_cos_std: float = 0.0) -> CellScene:
    """Draw order: intra batch, bank misalignment (if any), contaminator batch,
    contaminator beam cosines. The order is part of the determinism contract."""
    intra = draw_channel_batch(np.full(n_users, gain), varsigma_intra, n_clusters, rng)
    bank = build_bank(intra.bs_cos[:, 0], intra.ms_cos[:, 0], m_bs, p_ue,
                      cos_err_std=aoa_cos_std, rng=rng)
    contam = None
    beams = None
    if contam_gains is not None and contam_gains.size:
        contam = draw_channel_batch(contam_gains.ravel(), varsigma_inter, n_clusters, rng)
        beam_cos = sample_cos_angles(rng, contam_gains.size)
        beams = steering_from_cos(p_ue, beam_cos).conj() / np.sqrt(p_ue)
    return CellScene(intra=intra, bank=bank, contam=contam, contam_beams=beams)


@dataclass
class CellPilotParts:
    """Power-independent pieces of one cell's pilot phase.

    The compensated estimate at pilot energy E_P and BS noise sigma^2 is
    B (h_eq_true + contam_corr + sqrt(sigma^2 / E_P) noise_corr_unit); the
    fully-digital LS path shares the same front-end noise draw.
    """

    h_eq_true: np.ndarray      # (N, N)
    contam_corr: np.ndarray    # (N, N)
    noise_corr_unit: np.ndarray  # (N, N), unit-variance BS noise through F and pilots
    g_true: np.ndarray         # (N, M) effective uplink vectors H_k conj(w_k)
    g_contam: np.ndarray       # (N, M) summed same-pilot contamination vectors
    noise_g_unit: np.ndarray   # (N, M) unit-variance noise after pilot correlation
    f_rf: np.ndarray
    w: np.ndarray
    fd_true: np.ndarray | None = None     # (N, M) reference-antenna channels
    fd_contam: np.ndarray | None = None   # (N, M) same, summed contamination

    def delta(self, e_p: float, sigma_sq_bs: float) -> np.ndarray:
        return self.contam_corr + np.sqrt(sigma_sq_bs / e_p) * self.noise_corr_unit

    def estimate(self, e_p: float, sigma_sq_bs: float, b_diag: np.ndarray) -> np.ndarray:
        """Compensated N x N estimate hat(H)_eq^T."""
        raw = self.h_eq_true + self.delta(e_p, sigma_sq_bs)
        return b_diag[:, None] * raw

    def ls_estimate(self, e_p: float, sigma_sq_bs: float) -> np.ndarray:
        """(N, M) conventional LS estimate of the reference-antenna channels.

        No transmit beamforming on the pilots, so the contamination keeps its
        full relative energy xi^2 (the fully-digital saturation mechanism).
        """
        return self.fd_true + self.fd_contam + np.sqrt(sigma_sq_bs / e_p) * self.noise_g_unit


def cell_pilot_parts(scene: CellScene, pilots: PilotBook, m_bs: int,
                     rng: np.random.Generator, with_fd: bool = False) -> CellPilotParts:
    n = len(scene.intra)
    p_ue = scene.bank.w.shape[1]
    g_true = scene.intra.effective_uplink(m_bs, scene.bank.w)
    if scene.contam is not None:
        gc = scene.contam.effective_uplink(m_bs, scene.contam_beams)
        g_contam = gc.reshape(-1, n, m_bs).sum(axis=0)
    else:
        g_contam = np.zeros_like(g_true)
    z_unit = complex_normal(rng, (m_bs, pilots.n))
    f_rf = scene.bank.F_rf
    fd_true = fd_contam = None
    if with_fd:
        e_ref = np.zeros((n, p_ue))
        e_ref[:, 0] = 1.0
        fd_true = scene.intra.effective_uplink(m_bs, e_ref)
        if scene.contam is not None:
            n_contam = len(scene.contam)
            e_ref_c = np.zeros((n_contam, p_ue))
            e_ref_c[:, 0] = 1.0
            fd_contam = scene.contam.effective_uplink(m_bs, e_ref_c).reshape(-1, n, m_bs).sum(axis=0)
        else:
            fd_contam = np.zeros_like(fd_true)
    return CellPilotParts(
        h_eq_true=g_true @ f_rf,
        contam_corr=g_contam @ f_rf,
        noise_corr_unit=((f_rf.T @ z_unit) @ pilots.phi.conj()).T,
        g_true=g_true,
        g_contam=g_contam,
        noise_g_unit=(z_unit @ pilots.phi.conj()).T,
        f_rf=f_rf,
        w=scene.bank.w,
        fd_true=fd_true,
        fd_contam=fd_contam,
    )


# -- NMSE experiment ----------------------------------------------------------

def nmse_trial(cfg: ScenarioConfig, coeffs: ContaminationCoefficients,
               m_bs: int, p_ue: int, pilots: PilotBook,
               stream_key: tuple[int, ...], trial: int) -> dict[str, np.ndarray]:
    """Per-RF-chain compensated error energies for one trial (hybrid and LS)."""
    rng = rng_for(cfg.seed, TAG_NMSE, *stream_key, trial)
    gain = coeffs.ref_gain
    scene = draw_cell_scene(
        m_bs, p_ue, cfg.N, cfg.n_clusters, gain, cfg.varsigma_intra,
        coeffs.rho_sq * gain, cfg.varsigma_inter_ul, rng, cfg.aoa_cos_std,
    )
    parts = cell_pilot_parts(scene, pilots, m_bs, rng, with_fd=True)
    e_p = cfg.pilot_energy()
    sigma = cfg.noise_bs()
    delta = parts.delta(e_p, sigma)
    row_energy = np.sum(np.abs(delta) ** 2, axis=1) / gain    # |B delta|^2, B = 1/sqrt(gain)
    g_hat = parts.ls_estimate(e_p, sigma)
    ls_err = np.sum(np.abs(g_hat - parts.fd_true) ** 2, axis=1)
    ls_ref = np.sum(np.abs(parts.fd_true) ** 2, axis=1)
    return {"row_energy": row_energy, "ls_err": ls_err, "ls_ref": ls_ref}


# -- rate experiment ------------------------------------------------------------

@dataclass
class RateTrialSpec:
    """Static inputs of a rate trial; energies vary along the power sweep."""

    cfg: ScenarioConfig
    coeffs: ContaminationCoefficients
    m_bs: int
    p_ue: int
    e_p_points: np.ndarray
    e_s_points: np.ndarray
    include_ls: bool
    stream_key: tuple[int, ...]


def _precoder_or_none(h_hat: np.ndarray, cond_limit: float) -> ZfPrecoder | None:
    try:
        return zf_precoder(h_hat, cond_limit=cond_limit)
    except NearSingularEstimate:
        return None


def _fd_precoder(g_hat: np.ndarray) -> tuple[np.ndarray, float]:
    """Fully-digital ZF: right inverse of the (N, M) estimated rows, normalized."""
    w = np.linalg.pinv(g_hat)
    beta = 1.0 / np.sqrt(np.sum(np.abs(w) ** 2))
    return w, beta


def rate_trial(spec: RateTrialSpec, trial: int) -> dict[str, np.ndarray]:
    """One trial of the downlink across all power points.

    Returns per-point per-user power terms and instantaneous rates for the
    hybrid system and, optionally, the fully-digital LS baseline.
    """
    cfg, coeffs = spec.cfg, spec.coeffs
    m_bs, p_ue, n, n_cells = spec.m_bs, spec.p_ue, cfg.N, cfg.L + 1
    rng = rng_for(cfg.seed, TAG_RATE, *spec.stream_key, trial)
    pilots = build_pilots(n)
    gain = coeffs.ref_gain
    sigma_bs, sigma_ms = cfg.noise_bs(), cfg.noise_ms()
    b_diag = np.full(n, 1.0 / np.sqrt(gain))

    # draw order: desired scene+noise, downlink batch, neighbor scenes+noise
    scenes = [draw_cell_scene(
        m_bs, p_ue, n, cfg.n_clusters, gain, cfg.varsigma_intra,
        coeffs.rho_sq * gain, cfg.varsigma_inter_ul, rng, cfg.aoa_cos_std,
    )]
    parts = [cell_pilot_parts(scenes[0], pilots, m_bs, rng, with_fd=spec.include_ls)]

    dl_batch = None
    if cfg.L:
        dl_gains = (coeffs.zeta_sq * gain).ravel()
        dl_batch = draw_channel_batch(dl_gains, cfg.varsigma_dl(), cfg.n_clusters, rng)

    for l in range(cfg.L):
        scene = draw_cell_scene(
            m_bs, p_ue, n, cfg.n_clusters, gain, cfg.varsigma_intra,
            coeffs.rho_sq * gain, cfg.varsigma_inter_ul, rng, cfg.aoa_cos_std,
        )
        # TDD reciprocity: the pilots cell l hears from the desired cell's
        # users travel over the same physical channels its downlink later
        # interferes through, so slot 0 of its contamination IS the downlink
        # draw (directions and amplitude). The xi^2 knob calibrates only the
        # desired cell's own estimation error.
        sl = slice(l * n, (l + 1) * n)
        scene.contam.bs_cos[:n] = dl_batch.bs_cos[sl]
        scene.contam.ms_cos[:n] = dl_batch.ms_cos[sl]
        scene.contam.cluster_gains[:n] = dl_batch.cluster_gains[sl]
        scene.contam.gains[:n] = coeffs.zeta_sq[l] * gain
        scene.contam.ratios[:n] = cfg.varsigma_dl()
        scene.contam_beams[:n] = scenes[0].bank.w
        scenes.append(scene)
        parts.append(cell_pilot_parts(scene, pilots, m_bs, rng, with_fd=spec.include_ls))

    inter_t = []
    inter_t_fd = []
    if cfg.L:
        # w_k^H H_{l,k}^T equals (H w_k^*)^T for the (M, P)-oriented draw
        w0 = scenes[0].bank.w
        t_all = dl_batch.effective_uplink(m_bs, np.tile(w0, (cfg.L, 1)))
        inter_t = list(t_all.reshape(cfg.L, n, m_bs))
        if spec.include_ls:
            e_ref = np.zeros((cfg.L * n, p_ue))
            e_ref[:, 0] = 1.0
            t_fd = dl_batch.effective_uplink(m_bs, e_ref)
            inter_t_fd = list(t_fd.reshape(cfg.L, n, m_bs))

    n_pts = len(spec.e_p_points)
    shape = (n_pts, n)
    out = {
        "desired": np.full(shape, np.nan), "intra": np.full(shape, np.nan),
        "inter": np.full(shape, np.nan), "rate": np.full(shape, np.nan),
        "rejected": np.zeros(n_pts, dtype=bool),
    }
    if spec.include_ls:
        out.update({
            "ls_desired": np.full(shape, np.nan), "ls_intra": np.full(shape, np.nan),
            "ls_inter": np.full(shape, np.nan), "ls_rate": np.full(shape, np.nan),
        })

    for j, (e_p, e_s) in enumerate(zip(spec.e_p_points, spec.e_s_points)):
        own = _precoder_or_none(parts[0].estimate(e_p, sigma_bs, b_diag), ZF_COND_LIMIT)
        try:
            neighbors = [
                zf_precoder(parts[c].estimate(e_p, sigma_bs, b_diag), cond_limit=np.inf)
                for c in range(1, n_cells)
            ]
        except NearSingularEstimate:
            own = None
        if own is None:
            out["rejected"][j] = True
            continue
        coupling = parts[0].h_eq_true @ (own.beta * own.w_eq)
        power = e_s * np.abs(coupling) ** 2
        desired = np.diag(power).copy()
        intra = power.sum(axis=1) - desired
        inter = np.zeros(n)
        for l, prec in enumerate(neighbors):
            rows = inter_t[l] @ parts[l + 1].f_rf
            streams = rows @ (prec.beta * prec.w_eq)
            inter += e_s * np.sum(np.abs(streams) ** 2, axis=1)
        sample = SinrSample(desired, intra, inter, sigma_ms)
        out["desired"][j], out["intra"][j], out["inter"][j] = desired, intra, inter
        out["rate"][j] = sample.rates()

        if spec.include_ls:
            # conventional baseline: single-reference-antenna users, LS pilots
            w_fd, beta_fd = _fd_precoder(parts[0].ls_estimate(e_p, sigma_bs))
            c_fd = e_s * np.abs(parts[0].fd_true @ (beta_fd * w_fd)) ** 2
            d_fd = np.diag(c_fd).copy()
            i_fd = c_fd.sum(axis=1) - np.diag(c_fd)
            x_fd = np.zeros(n)
            for l in range(cfg.L):
                w_l, beta_l = _fd_precoder(parts[l + 1].ls_estimate(e_p, sigma_bs))
                streams = inter_t_fd[l] @ (beta_l * w_l)
                x_fd += e_s * np.sum(np.abs(streams) ** 2, axis=1)
            fd_sample = SinrSample(d_fd, i_fd, x_fd, sigma_ms)
            out["ls_desired"][j], out["ls_intra"][j], out["ls_inter"][j] = d_fd, i_fd, x_fd
            out["ls_rate"][j] = fd_sample.rates()
    return out


# -- deterministic fan-out -------------------------------------------------------

def _nmse_chunk(args):
    cfg, coeffs, m_bs, p_ue, stream_key, trials = args
    pilots = build_pilots(cfg.N)
    return [nmse_trial(cfg, coeffs, m_bs, p_ue, pilots, stream_key, t) for t in trials]


def _rate_chunk(args):
    spec, trials = args
    return [rate_trial(spec, t) for t in trials]


def _fan_out(chunk_fn, make_args, n_trials: int, workers: int) -> list:
    """Run trials possibly in parallel; results come back indexed by trial."""
    trial_ids = list(range(n_trials))
    if workers <= 1:
        return chunk_fn(make_args(trial_ids))
    chunks = [trial_ids[i::workers] for i in range(workers)]
    chunks = [c for c in chunks if c]
    results: list = [None] * n_trials
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        for ids, outs in zip(chunks, pool.map(chunk_fn, [make_args(c) for c in chunks])):
            for t, res in zip(ids, outs):
                results[t] = res
    return results


def run_nmse_trials(cfg: ScenarioConfig, coeffs: ContaminationCoefficients,
                    m_bs: int, p_ue: int, n_trials: int,
                    stream_key: tuple[int, ...], workers: int = 1) -> list[dict]:
    return _fan_out(
        _nmse_chunk,
        lambda ids: (cfg, coeffs, m_bs, p_ue, stream_key, ids),
        n_trials, workers,
    )


def run_rate_trials(spec: RateTrialSpec, n_trials: int, workers: int = 1) -> list[dict]:
    return _fan_out(_rate_chunk, lambda ids: (spec, ids), n_trials, workers)
