"""Figure-style experiment drivers emitting deterministic CSV tables.

Each driver is a pure function of (config, grids): the deployment is drawn
once from the master seed, per-trial substreams are derived per sweep point,
and aggregation runs in fixed trial order so re-runs and any worker count
produce byte-identical CSVs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, apply_overrides, dbm_to_watts
from .downlink import RateReport, SinrSample, theorem2_rate, upper_bound_rate
from .estimation import NmseReport, analytical_nmse
from .geometry import contamination_coefficients, drop_deployment
from .simulate import (
    TAG_DEPLOY,
    RateTrialSpec,
    rng_for,
    run_nmse_trials,
    run_rate_trials,
)

FIG3_M_GRID = (16, 32, 64, 128, 256)
FIG3_P_GRID = (4, 10)
FIG4_POWER_GRID_DBM = tuple(range(20, 47, 2))
FIG5_M_GRID = (64, 96, 128, 192, 256, 384, 512)


@dataclass
class ExperimentResult:
    experiment: str
    columns: list[str]
    rows: list[tuple]
    seed: int
    fingerprint: str

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)


def emit_csv(result: ExperimentResult, path: str | Path) -> Path:
    """Write the result table; every row carries seed and config fingerprint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    def fmt(v):
        if isinstance(v, float):
            return format(v, ".12g")
        return str(v)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", *result.columns, "seed", "config_fingerprint"])
        for row in result.rows:
            writer.writerow([result.experiment, *map(fmt, row), result.seed, result.fingerprint])
    return path


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    t = values.size
    half = 1.96 * values.std(ddof=1) / np.sqrt(t) if t > 1 else 0.0
    return float(values.mean()), float(half)


def _jackknife_ci(per_user_terms: list[np.ndarray], sigma: float) -> float:
    """Half-width of the hardened rate via leave-one-trial-out resampling."""
    d, i, x = (np.asarray(a) for a in per_user_terms)   # each (T, N)
    t = d.shape[0]
    if t < 2:
        return 0.0
    def hardened(ds, is_, xs):
        return float(np.mean(np.log2(1.0 + ds / (is_ + xs + sigma))))
    sums = [a.sum(axis=0) for a in (d, i, x)]
    loo = np.empty(t)
    for k in range(t):
        ds, is_, xs = ((s - a[k]) / (t - 1) for s, a in zip(sums, (d, i, x)))
        loo[k] = hardened(ds, is_, xs)
    return float(1.96 * np.sqrt((t - 1) / t * np.sum((loo - loo.mean()) ** 2)))


def _per_user_rates(d: np.ndarray, i: np.ndarray, x: np.ndarray, sigma: float) -> SinrSample:
    """Trial-averaged power decomposition; rate per user comes from it."""
    return SinrSample(desired=d.mean(axis=0), intra=i.mean(axis=0),
                      inter=x.mean(axis=0), noise=sigma)


# -- NMSE sweep (Fig. 3) -------------------------------------------------------

def fig3_config(base: ScenarioConfig | None = None,
                overrides: dict[str, str] | None = None) -> ScenarioConfig:
    cfg = (base or ScenarioConfig()).replace(
        varsigma_intra=5.0, varsigma_inter_ul=5.0, varsigma_inter_dl=None,
        xi_sq=0.01, max_tx_power_dbm=46.0, trials=2000,
    )
    return apply_overrides(cfg, overrides) if overrides else cfg


def run_nmse_sweep(cfg: ScenarioConfig, m_grid, p_grid, workers: int = 1,
                   experiment: str = "fig3") -> ExperimentResult:
    deployment = drop_deployment(cfg, rng_for(cfg.seed, TAG_DEPLOY))
    coeffs = contamination_coefficients(cfg, deployment)
    rows = []
    for pi, p_ue in enumerate(sorted(p_grid)):
        for mi, m_bs in enumerate(sorted(m_grid)):
            res = run_nmse_trials(cfg, coeffs, m_bs, p_ue, cfg.trials,
                                  stream_key=(pi, mi), workers=workers)
            scale = cfg.N * m_bs * p_ue
            per_trial = np.array([r["row_energy"].mean() for r in res]) / scale
            _, half = _mean_ci(per_trial)
            report = NmseReport(
                empirical=np.mean([r["row_energy"] for r in res], axis=0) / scale,
                analytical=np.array([
                    analytical_nmse(coeffs.rho_sq[:, k], coeffs.ref_gain,
                                    cfg.pilot_energy(), cfg.noise_bs(), m_bs, p_ue)
                    for k in range(cfg.N)
                ]),
                m_bs=m_bs, p_ue=p_ue,
                xi_sq=float(coeffs.xi_sq_per_user().mean()),
                est_snr=coeffs.ref_gain * cfg.pilot_energy() / cfg.noise_bs(),
            )
            rows.append((m_bs, p_ue, float(report.empirical.mean()),
                         float(report.analytical.mean()), half, cfg.trials, 0))
    rows.sort(key=lambda r: (r[0], r[1]))
    return ExperimentResult(
        experiment=experiment,
        columns=["m", "p", "empirical_nmse", "analytical_nmse",
                 "ci_halfwidth", "trials", "rejected"],
        rows=rows, seed=cfg.seed, fingerprint=cfg.fingerprint(),
    )


def run_fig3(base: ScenarioConfig | None = None, overrides: dict[str, str] | None = None,
             m_grid=FIG3_M_GRID, p_grid=FIG3_P_GRID, workers: int = 1) -> ExperimentResult:
    return run_nmse_sweep(fig3_config(base, overrides), m_grid, p_grid, workers)


# -- rate experiments (Figs. 4 and 5) --------------------------------------------

def _rate_rows(cfg: ScenarioConfig, coeffs, m_bs: int, e_p: np.ndarray, e_s: np.ndarray,
               include_ls: bool, stream_key: tuple[int, ...], workers: int):
    """Per-point aggregates of one rate sweep sharing per-trial channels."""
    spec = RateTrialSpec(cfg, coeffs, m_bs, cfg.P, np.asarray(e_p), np.asarray(e_s),
                         include_ls=include_ls, stream_key=stream_key)
    trials = run_rate_trials(spec, cfg.trials, workers=workers)
    sigma = cfg.noise_ms()
    out = []
    for j in range(len(e_s)):
        valid = [r for r in trials if not r["rejected"][j]]
        rejected = cfg.trials - len(valid)
        if not valid:
            point = {"terms": None, "per_user_rate": np.full(cfg.N, np.nan),
                     "rate": float("nan"), "ergodic": float("nan"),
                     "ci": 0.0, "rejected": rejected}
            if include_ls:
                point.update({"ls_rate": float("nan"), "ls_ci": 0.0})
            out.append(point)
            continue
        d = np.array([r["desired"][j] for r in valid])
        i = np.array([r["intra"][j] for r in valid])
        x = np.array([r["inter"][j] for r in valid])
        terms = _per_user_rates(d, i, x, sigma)
        point = {
            "terms": terms,
            "per_user_rate": terms.rates(),
            "rate": float(terms.rates().mean()),
            "ergodic": float(np.mean([r["rate"][j] for r in valid])),
            "ci": _jackknife_ci([d, i, x], sigma),
            "rejected": rejected,
        }
        if include_ls:
            ld = np.array([r["ls_desired"][j] for r in valid])
            li = np.array([r["ls_intra"][j] for r in valid])
            lx = np.array([r["ls_inter"][j] for r in valid])
            point["ls_rate"] = float(_per_user_rates(ld, li, lx, sigma).rates().mean())
            point["ls_ci"] = _jackknife_ci([ld, li, lx], sigma)
        out.append(point)
    return out


def _analytical_rates(cfg: ScenarioConfig, coeffs, m_bs: int, e_s: float) -> tuple[np.ndarray, float]:
    per_user = np.array([
        theorem2_rate(float(coeffs.rho_sq[:, k].sum()), float(coeffs.zeta_sq[:, k].sum()),
                      cfg.varsigma_intra, m_bs, cfg.P, cfg.N,
                      coeffs.ref_gain, e_s, cfg.noise_ms())
        for k in range(cfg.N)
    ])
    upper = upper_bound_rate(m_bs, cfg.P, cfg.N, cfg.varsigma_intra,
                             coeffs.ref_gain * e_s, cfg.noise_ms())
    return per_user, upper


def fig4_config(base: ScenarioConfig | None = None,
                overrides: dict[str, str] | None = None) -> ScenarioConfig:
    cfg = (base or ScenarioConfig()).replace(
        M=200, P=10, varsigma_intra=4.0, varsigma_inter_ul=2.0, varsigma_inter_dl=None,
        xi_sq=0.01, trials=500,
    )
    return apply_overrides(cfg, overrides) if overrides else cfg


def run_fig4(base: ScenarioConfig | None = None, overrides: dict[str, str] | None = None,
             power_grid_dbm=FIG4_POWER_GRID_DBM, workers: int = 1) -> ExperimentResult:
    cfg = fig4_config(base, overrides)
    deployment = drop_deployment(cfg, rng_for(cfg.seed, TAG_DEPLOY))
    coeffs = contamination_coefficients(cfg, deployment)
    powers = sorted(power_grid_dbm)
    e_s = np.array([dbm_to_watts(p) for p in powers])
    e_p = cfg.N * e_s   # pilots follow the same max-power knob
    points = _rate_rows(cfg, coeffs, cfg.M, e_p, e_s, False, (0,), workers)
    rows = []
    for p_dbm, es, pt in zip(powers, e_s, points):
        ana, upper = _analytical_rates(cfg, coeffs, cfg.M, es)
        rows.append((float(p_dbm), pt["rate"], float(ana.mean()), upper, pt["ergodic"],
                     pt["ci"], cfg.trials, pt["rejected"]))
    return ExperimentResult(
        experiment="fig4",
        columns=["power_dbm", "empirical_rate", "analytical_rate", "upper_bound_rate",
                 "ergodic_rate", "ci_halfwidth", "trials", "rejected"],
        rows=rows, seed=cfg.seed, fingerprint=cfg.fingerprint(),
    )


def fig5_config(base: ScenarioConfig | None = None,
                overrides: dict[str, str] | None = None) -> ScenarioConfig:
    # xi^2 = 0.2 applies to the hybrid and the LS baseline alike
    cfg = (base or ScenarioConfig()).replace(
        P=10, varsigma_intra=4.0, varsigma_inter_ul=2.0, varsigma_inter_dl=None,
        xi_sq=0.2, max_tx_power_dbm=46.0, trials=500,
    )
    return apply_overrides(cfg, overrides) if overrides else cfg


def run_fig5(base: ScenarioConfig | None = None, overrides: dict[str, str] | None = None,
             m_grid=FIG5_M_GRID, workers: int = 1) -> ExperimentResult:
    cfg = fig5_config(base, overrides)
    deployment = drop_deployment(cfg, rng_for(cfg.seed, TAG_DEPLOY))
    coeffs = contamination_coefficients(cfg, deployment)
    e_s = np.array([cfg.data_energy()])
    e_p = np.array([cfg.pilot_energy()])
    rows = []
    for mi, m_bs in enumerate(sorted(m_grid)):
        pt = _rate_rows(cfg, coeffs, m_bs, e_p, e_s, True, (mi,), workers)[0]
        ana, upper = _analytical_rates(cfg, coeffs, m_bs, float(e_s[0]))
        rows.append((m_bs, pt["rate"], float(ana.mean()), upper, pt["ls_rate"], pt["ergodic"],
                     pt["ci"], pt["ls_ci"], cfg.trials, pt["rejected"]))
    return ExperimentResult(
        experiment="fig5",
        columns=["m", "hybrid_rate", "analytical_rate", "upper_bound_rate", "ls_rate",
                 "ergodic_rate", "ci_halfwidth", "ls_ci_halfwidth", "trials", "rejected"],
        rows=rows, seed=cfg.seed, fingerprint=cfg.fingerprint(),
    )


# -- single-point custom runs ---------------------------------------------------

def run_nmse_point(cfg: ScenarioConfig, workers: int = 1) -> ExperimentResult:
    result = run_nmse_sweep(cfg, [cfg.M], [cfg.P], workers, experiment="nmse")
    return result


def run_rate_point(cfg: ScenarioConfig, workers: int = 1) -> ExperimentResult:
    deployment = drop_deployment(cfg, rng_for(cfg.seed, TAG_DEPLOY))
    coeffs = contamination_coefficients(cfg, deployment)
    e_s = np.array([cfg.data_energy()])
    e_p = np.array([cfg.pilot_energy()])
    pt = _rate_rows(cfg, coeffs, cfg.M, e_p, e_s, True, (0,), workers)[0]
    ana, upper = _analytical_rates(cfg, coeffs, cfg.M, float(e_s[0]))
    report = RateReport(per_user_rate=pt["per_user_rate"], analytical_rate=ana,
                        upper_bound=upper, terms=pt["terms"])
    rows = [(cfg.max_tx_power_dbm, report.average_rate(), float(ana.mean()), upper,
             pt["ls_rate"], pt["ergodic"], pt["ci"], cfg.trials, pt["rejected"])]
    return ExperimentResult(
        experiment="rate",
        columns=["power_dbm", "empirical_rate", "analytical_rate", "upper_bound_rate",
                 "ls_rate", "ergodic_rate", "ci_halfwidth", "trials", "rejected"],
        rows=rows, seed=cfg.seed, fingerprint=cfg.fingerprint(),
    )
