"""Figure builders for the four experiment CSV kinds.

Each builder consumes only the documented CSV schema (plus, for the
magic-vs-tau kind, the experiment manifest sitting next to the CSV,
which carries the Haar baseline and L log 2). Missing columns raise
SchemaError with the exact diff; empty CSVs raise too - no silent row
dropping. Styling is pinned so a re-render is byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("magic-vs-tau", "magic-vs-r", "success-rate", "plateau")

_SCHEMAS = {
    "magic-vs-tau": [
        "r",
        "a",
        "tau",
        "m2_analytic_exactLambda",
        "m2_analytic_closedLambda",
        "m2_exact",
        "regime",
    ],
    "magic-vs-r": ["r", "a", "m2_final_exactLambda", "m2_small_r_asymptote", "m2_saturation_asymptote"],
    "success-rate": ["N", "L", "r", "g", "p_succ", "S", "S_norm", "m2_final", "m2_ratio"],
    "plateau": ["a", "r", "t_max", "delta_tau_m2", "delta_tau_psucc", "censored"],
}

_RC = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "shor-figures",
    "legend.fontsize": 8,
}


class SchemaError(ValueError):
    """CSV header does not match the documented schema for the kind."""


@dataclass
class FigureSpec:
    kind: str
    csv_path: Path
    out_path: Path
    manifest_path: Path | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        self.csv_path = Path(self.csv_path)
        self.out_path = Path(self.out_path)
        if self.manifest_path is None:
            candidate = self.csv_path.with_suffix("").with_suffix("")  # strip .csv
            candidate = self.csv_path.parent / (self.csv_path.stem + ".manifest.json")
            if candidate.exists():
                self.manifest_path = candidate
        elif self.manifest_path is not None:
            self.manifest_path = Path(self.manifest_path)


def _read_rows(spec: FigureSpec) -> list[dict]:
    with open(spec.csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise SchemaError(f"{spec.csv_path}: empty file, no header")
        missing = [col for col in _SCHEMAS[spec.kind] if col not in header]
        if missing:
            raise SchemaError(
                f"{spec.csv_path}: schema mismatch for kind {spec.kind!r}: "
                f"missing columns {missing}, found {sorted(header)}"
            )
        rows = list(reader)
    if not rows:
        raise ValueError(f"{spec.csv_path}: no data rows")
    return rows


def _fnum(value: str) -> float | None:
    return None if value == "" else float(value)


def _load_manifest(spec: FigureSpec) -> dict:
    if spec.manifest_path is None or not Path(spec.manifest_path).exists():
        raise ValueError(
            f"{spec.csv_path}: manifest JSON not found (needed for the Haar baseline); "
            "pass --manifest explicitly"
        )
    return json.loads(Path(spec.manifest_path).read_text())


def _palette(n: int):
    cmap = plt.get_cmap("viridis")
    return [cmap(x) for x in np.linspace(0.0, 0.92, max(n, 1))]


def _fig_magic_vs_tau(spec: FigureSpec, rows: list[dict]):
    manifest = _load_manifest(spec)
    context = manifest["context"]
    haar = float(context["haar_m2"])
    l_log2 = float(context["l_log2"])
    groups: dict[tuple[int, int], list[dict]] = {}
    for row in rows:
        groups.setdefault((int(row["r"]), int(row["a"])), []).append(row)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    colors = _palette(len(groups))
    for color, ((r, a), grp) in zip(colors, sorted(groups.items())):
        grp = sorted(grp, key=lambda row: int(row["tau"]))
        taus = [int(row["tau"]) for row in grp]
        ax.plot(
            taus,
            [float(row["m2_analytic_exactLambda"]) for row in grp],
            color=color,
            lw=1.6,
            label=f"r={r} (a={a})",
        )
        ax.plot(
            taus,
            [float(row["m2_analytic_closedLambda"]) for row in grp],
            color=color,
            lw=0.9,
            ls=":",
        )
        sims = [(t, _fnum(row["m2_exact"])) for t, row in zip(taus, grp)]
        sims = [(t, v) for t, v in sims if v is not None]
        if sims:
            ax.scatter([t for t, _ in sims], [v for _, v in sims], color=color, s=14, zorder=3)
    ax.axhline(haar, color="0.3", ls="--", lw=1.0, label="Haar average")
    ax.set_xlabel(r"step $\tau$")
    ax.set_ylabel(r"$M_2$ [nats]")
    right = ax.secondary_yaxis("right", functions=(lambda y: y / l_log2, lambda y: y * l_log2))
    right.set_ylabel(r"$M_2 / (L \log 2)$")
    ax.set_title(f"Magic vs step, N={context['N']} (solid: exact $\\Lambda$, dotted: closed form)")
    ax.legend(loc="upper left", ncol=2)
    return fig


def _fig_magic_vs_r(spec: FigureSpec, rows: list[dict]):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    rs = np.array([int(row["r"]) for row in rows])
    finals = np.array([float(row["m2_final_exactLambda"]) for row in rows])
    ax.scatter(rs, finals, s=16, color="tab:blue", zorder=3, label=r"exact $\Lambda$ (per coprime)")
    law = sorted({(int(row["r"]), float(row["m2_small_r_asymptote"])) for row in rows})
    ax.plot([x for x, _ in law], [y for _, y in law], color="tab:orange", lw=1.3, label=r"$\log(r^3/(6r-5))$")
    sat = sorted({(int(row["r"]), float(row["m2_saturation_asymptote"])) for row in rows})
    sat = [(x, y) for x, y in sat if y > 0]
    if sat:
        ax.plot([x for x, _ in sat], [y for _, y in sat], color="tab:green", lw=1.3, label="saturation law")
    ax.set_xscale("log")
    ax.set_xlabel(r"period $r$")
    ax.set_ylabel(r"final $M_2$ [nats]")
    ax.set_ylim(bottom=-0.2, top=float(finals.max()) + 0.8)
    ax.set_title("Final magic vs period")
    ax.legend(loc="upper left")
    return fig


def _fig_success_rate(spec: FigureSpec, rows: list[dict]):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    x = np.array([int(row["r"]) / int(row["N"]) for row in rows])
    y = np.array([float(row["S_norm"]) for row in rows])
    c = np.array([float(row["m2_ratio"]) for row in rows])
    positive = y[y > 0]
    floor = positive.min() / 3.0 if positive.size else 1e-6
    clipped = y <= 0
    y_plot = np.where(clipped, floor, y)
    sc = ax.scatter(x[~clipped], y_plot[~clipped], c=c[~clipped], cmap="plasma", vmin=0.0, vmax=1.0, s=18)
    if clipped.any():
        ax.scatter(
            x[clipped],
            y_plot[clipped],
            c=c[clipped],
            cmap="plasma",
            vmin=0.0,
            vmax=1.0,
            s=18,
            marker="v",
            label="S = 0 (shown at floor)",
        )
        ax.legend(loc="lower right")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$r/N$")
    ax.set_ylabel(r"$S/S_{max}$")
    fig.colorbar(sc, ax=ax, label=r"$M_2/(L \log 2)$")
    ax.set_title("Conditional success rate vs rescaled period")
    return fig


def _fig_plateau(spec: FigureSpec, rows: list[dict]):
    fig, ax = plt.subplots(figsize=(4.6, 4.4))
    solid = [row for row in rows if row["censored"] == "false"]
    censored = [row for row in rows if row["censored"] != "false"]
    if solid:
        ax.scatter(
            [int(row["delta_tau_m2"]) for row in solid],
            [int(row["delta_tau_psucc"]) for row in solid],
            s=22,
            color="tab:blue",
            label="coprimes",
            zorder=3,
        )
    if censored:
        ax.scatter(
            [int(row["delta_tau_m2"]) for row in censored],
            [int(row["delta_tau_psucc"]) for row in censored],
            s=26,
            facecolors="none",
            edgecolors="tab:red",
            label="censored (p > 0 in range)",
            zorder=3,
        )
    values = [int(row["delta_tau_m2"]) for row in rows] + [int(row["delta_tau_psucc"]) for row in rows]
    lo, hi = min(values) - 1, max(values) + 1
    ax.plot([lo, hi], [lo, hi], color="0.4", ls="--", lw=1.0, label="identity")
    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.set_aspect("equal")
    ax.set_xlabel(r"$\Delta\tau_{M_2}$ [steps]")
    ax.set_ylabel(r"$\Delta\tau_{p_{succ}}$ [steps]")
    ax.set_title("Magic plateau vs success decay interval")
    ax.legend(loc="upper left")
    return fig


_BUILDERS = {
    "magic-vs-tau": _fig_magic_vs_tau,
    "magic-vs-r": _fig_magic_vs_r,
    "success-rate": _fig_success_rate,
    "plateau": _fig_plateau,
}


def render(spec: FigureSpec):
    """Build the figure and write both raster (.png) and vector (.svg).

    Returns (figure, [written paths]). The companion format is derived
    by swapping the out_path suffix.
    """
    rows = _read_rows(spec)
    with plt.rc_context(_RC):
        fig = _BUILDERS[spec.kind](spec, rows)
        fig.tight_layout()
        out = Path(spec.out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix not in (".png", ".svg"):
            out = out.with_suffix(".png")
        partner = out.with_suffix(".svg" if out.suffix == ".png" else ".png")
        written = []
        for path in (out, partner):
            if path.suffix == ".svg":
                fig.savefig(path, metadata={"Date": None})
            else:
                fig.savefig(path)
            written.append(path)
        plt.close(fig)
    return fig, written
