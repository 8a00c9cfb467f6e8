#!/usr/bin/env python3
"""Render figure-style plots from simulator CSV tables.

Reads only the CSV (column names from its header row); computes no physics.
One output file per invocation:

    python plots/plots.py --kind fig3 --in results/fig3.csv --out fig3.pdf

fig3: log-y NMSE vs M, one empirical/analytical pair per P value.
fig4: rate vs transmit power with the closed-form and upper-bound curves.
fig5: rate vs M with hybrid, analytical, upper-bound, and LS-baseline curves.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


@dataclass
class FigureSpec:
    kind: str          # fig3 | fig4 | fig5
    csv_path: Path
    out_path: Path     # one output file per invocation

STYLES = {
    "empirical": dict(marker="o", linestyle="none", color="#1f77b4"),
    "analytical": dict(linestyle="-", color="#d62728"),
    "upper": dict(linestyle="--", color="#2ca02c"),
    "ls": dict(marker="s", linestyle="none", color="#7f7f7f"),
}


class PlotError(Exception):
    pass


def read_table(path: Path) -> dict[str, list[float]]:
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PlotError(f"{path}: empty CSV, nothing to plot")
        rows = list(reader)
    if not rows:
        raise PlotError(f"{path}: CSV has a header but no data rows")
    table: dict[str, list[float]] = {}
    for name in reader.fieldnames:
        column = [row[name] for row in rows]
        try:
            table[name] = [float(v) for v in column]
        except (TypeError, ValueError):
            table[name] = column   # non-numeric columns kept as-is
    return table


def need(table: dict, *names: str) -> list[list[float]]:
    missing = [n for n in names if n not in table]
    if missing:
        raise PlotError(
            f"missing column(s) {missing}; available: {sorted(table)}"
        )
    return [table[n] for n in names]


def render_fig3(table: dict, ax) -> None:
    m, p, emp, ana, ci = need(
        table, "m", "p", "empirical_nmse", "analytical_nmse", "ci_halfwidth")
    colors = plt.cm.tab10.colors
    for idx, p_val in enumerate(sorted(set(p))):
        sel = [i for i, v in enumerate(p) if v == p_val]
        xs = [m[i] for i in sel]
        ax.errorbar(xs, [emp[i] for i in sel], yerr=[ci[i] for i in sel],
                    marker="o", linestyle="none", capsize=3, color=colors[idx % 10],
                    label=f"empirical_nmse (p={p_val:g})")
        ax.plot(xs, [ana[i] for i in sel], linestyle="-", color=colors[idx % 10],
                label=f"analytical_nmse (p={p_val:g})")
    ax.set_yscale("log")
    ax.set_xlabel("m")
    ax.set_ylabel("normalized MSE")


def render_fig4(table: dict, ax) -> None:
    x, emp, ana, upper, ci = need(
        table, "power_dbm", "empirical_rate", "analytical_rate",
        "upper_bound_rate", "ci_halfwidth")
    ax.errorbar(x, emp, yerr=ci, capsize=3, label="empirical_rate", **STYLES["empirical"])
    ax.plot(x, ana, label="analytical_rate", **STYLES["analytical"])
    ax.plot(x, upper, label="upper_bound_rate", **STYLES["upper"])
    ax.set_xlabel("power_dbm")
    ax.set_ylabel("rate [bits/s/Hz]")


def render_fig5(table: dict, ax) -> None:
    m, hyb, ana, upper, ls = need(
        table, "m", "hybrid_rate", "analytical_rate", "upper_bound_rate", "ls_rate")
    ci = table.get("ci_halfwidth", [0.0] * len(m))
    ls_ci = table.get("ls_ci_halfwidth", [0.0] * len(m))
    ax.errorbar(m, hyb, yerr=ci, capsize=3, label="hybrid_rate", **STYLES["empirical"])
    ax.plot(m, ana, label="analytical_rate", **STYLES["analytical"])
    ax.plot(m, upper, label="upper_bound_rate", **STYLES["upper"])
    ax.errorbar(m, ls, yerr=ls_ci, capsize=3, label="ls_rate", **STYLES["ls"])
    ax.set_xlabel("m")
    ax.set_ylabel("rate [bits/s/Hz]")


RENDERERS = {"fig3": render_fig3, "fig4": render_fig4, "fig5": render_fig5}


def render_spec(spec: FigureSpec) -> Path:
    table = read_table(spec.csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    try:
        RENDERERS[spec.kind](table, ax)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        # no timestamps: repeated runs on the same CSV are byte-identical
        fig.savefig(spec.out_path, metadata={"CreationDate": None})
    finally:
        plt.close(fig)
    return spec.out_path


def render(kind: str, csv_path: Path, out_path: Path) -> Path:
    return render_spec(FigureSpec(kind=kind, csv_path=Path(csv_path), out_path=Path(out_path)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="csv_path", required=True, type=Path)
    parser.add_argument("--out", dest="out_path", required=True, type=Path)
    args = parser.parse_args(argv)
    try:
        path = render(args.kind, args.csv_path, args.out_path)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
