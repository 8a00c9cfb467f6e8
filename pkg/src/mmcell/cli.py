"""Command-line entry point: figure reproductions, custom points, selftest.

Exit codes: 0 success, 1 usage error, 2 numeric/selftest failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .beamforming import mean_array_gain
from .config import ConfigError, ScenarioConfig, apply_overrides, load_config
from .downlink import zf_precoder
from .estimation import build_pilots
from .geometry import contamination_coefficients, drop_deployment
from .simulate import (
    TAG_DEPLOY,
    cell_pilot_parts,
    draw_cell_scene,
    rng_for,
    worker_count,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_grid(text: str) -> list[float]:
    """Accept '26:46:2' (inclusive range) or '32,64,128'."""
    if ":" in text:
        start, stop, step = (float(tok) for tok in text.split(":"))
        if step <= 0:
            raise _UsageError(f"grid step must be positive: {text!r}")
        vals = []
        v = start
        while v <= stop + 1e-9:
            vals.append(round(v, 9))
            v += step
        return vals
    return [float(tok) for tok in text.split(",") if tok]


def _build_parser() -> _Parser:
    parser = _Parser(prog="mmcell-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fig3", "fig4", "fig5", "nmse", "rate", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None)
        p.add_argument("--out", type=Path, default=Path("results"))
        p.add_argument("--workers", type=int, default=None)
        if name == "fig3":
            p.add_argument("--m-grid", type=_parse_grid, default=None)
            p.add_argument("--p-grid", type=_parse_grid, default=None)
        if name == "fig4":
            p.add_argument("--power-grid", type=_parse_grid, default=None)
        if name == "fig5":
            p.add_argument("--m-grid", type=_parse_grid, default=None)
    return parser


def _split_overrides(argv: list[str]) -> tuple[list[str], dict[str, str]]:
    """Pull generic --<config-field> value pairs out of the raw argv."""
    known = {"--config", "--out", "--workers", "--m-grid", "--p-grid", "--power-grid"}
    fields = {f"--{name}" for name in ScenarioConfig.__dataclass_fields__}
    args, overrides = [], {}
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in fields and tok not in known:
            if i + 1 >= len(argv):
                raise _UsageError(f"missing value for {tok}")
            overrides[tok[2:]] = argv[i + 1]
            i += 2
        else:
            args.append(tok)
            i += 1
    return args, overrides


def _selftest() -> int:
    failures = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        failures += 0 if ok else 1

    for n in (1, 2, 7, 64, 333, 1024):
        g = mean_array_gain(n)
        check(f"mean array gain n={n}", abs(g - 1.0) < 1e-9, f"value={g:.12f}")

    cfg = ScenarioConfig(M=64, P=4, N=10, trials=1)
    coeffs = contamination_coefficients(cfg, drop_deployment(cfg, rng_for(cfg.seed, TAG_DEPLOY)))
    pilots = build_pilots(cfg.N)
    b = np.full(cfg.N, 1.0 / np.sqrt(coeffs.ref_gain))
    worst_zf, worst_recon = 0.0, 0.0
    for t in range(20):
        rng = rng_for(cfg.seed, 0xE57, t)
        scene = draw_cell_scene(cfg.M, cfg.P, cfg.N, cfg.n_clusters, coeffs.ref_gain,
                                cfg.varsigma_intra, coeffs.rho_sq * coeffs.ref_gain,
                                cfg.varsigma_inter_ul, rng)
        parts = cell_pilot_parts(scene, pilots, cfg.M, rng)
        h_hat = parts.estimate(cfg.pilot_energy(), cfg.noise_bs(), b)
        prec = zf_precoder(h_hat)
        worst_zf = max(worst_zf, float(np.max(np.abs(h_hat @ prec.w_eq - np.eye(cfg.N)))))
        recon = b[:, None] * (parts.h_eq_true + parts.delta(cfg.pilot_energy(), cfg.noise_bs()))
        worst_recon = max(worst_recon, float(np.max(np.abs(recon - h_hat))))
    check("ZF exactness (20 estimates)", worst_zf < 1e-10, f"max|HW - I|={worst_zf:.2e}")
    check("estimate reconstruction identity", worst_recon < 1e-12, f"max err={worst_recon:.2e}")

    psi = pilots.phi
    gram = psi.conj().T @ psi
    check("pilot book unitarity", float(np.max(np.abs(gram - np.eye(cfg.N)))) < 1e-12)
    return 0 if failures == 0 else 2


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args_list, overrides = _split_overrides(argv)
        args = _build_parser().parse_args(args_list)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    if args.command == "selftest":
        return _selftest()

    try:
        base = load_config(args.config) if args.config else None
        workers = args.workers if args.workers is not None else worker_count()
        if args.command == "fig3":
            result = experiments.run_fig3(
                base, overrides,
                m_grid=[int(m) for m in args.m_grid] if args.m_grid else experiments.FIG3_M_GRID,
                p_grid=[int(p) for p in args.p_grid] if args.p_grid else experiments.FIG3_P_GRID,
                workers=workers,
            )
        elif args.command == "fig4":
            result = experiments.run_fig4(
                base, overrides,
                power_grid_dbm=args.power_grid or experiments.FIG4_POWER_GRID_DBM,
                workers=workers,
            )
        elif args.command == "fig5":
            result = experiments.run_fig5(
                base, overrides,
                m_grid=[int(m) for m in args.m_grid] if args.m_grid else experiments.FIG5_M_GRID,
                workers=workers,
            )
        else:
            cfg = base or ScenarioConfig()
            if overrides:
                cfg = apply_overrides(cfg, overrides)
            runner = experiments.run_nmse_point if args.command == "nmse" else experiments.run_rate_point
            result = runner(cfg, workers=workers)
    except (ConfigError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2

    path = experiments.emit_csv(result, Path(args.out) / f"{result.experiment}.csv")
    print(f"wrote {path} ({len(result.rows)} rows, seed={result.seed}, "
          f"fingerprint={result.fingerprint})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
