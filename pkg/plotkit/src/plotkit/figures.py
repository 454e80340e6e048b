"""Figure rendering for the simulator's CSV/JSON outputs.

Each figure kind consumes only the documented file schemas (Wigner CSV with
columns x, p, w; fits.json with per-snapshot squeezing fits; sweep CSV with
parameter/metric columns).  Inputs are validated before any drawing happens,
and rendering never mutates them.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpecError", "load_spec", "render"]

WIGNER_BOUND = 2.0 / math.pi
KINDS = ("wigner_panel", "level_vs_cycle", "rate_inset", "sweep_heatmap",
         "period_fit", "metrics_curve")


class FigureSpecError(Exception):
    """Invalid figure spec or input file."""


def load_spec(path) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FigureSpecError(f"cannot load spec: {exc}") from exc
    kind = spec.get("kind")
    if kind not in KINDS:
        raise FigureSpecError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
    spec.setdefault("inputs", {})
    spec.setdefault("style", {})
    return spec


def _read_csv_columns(path, required: list[str]) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise FigureSpecError(f"input file {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise FigureSpecError(
                    f"{path.name}: missing required column {col!r} "
                    f"(found {header})")
        rows = [row for row in reader]
    out = {}
    for col in header:
        vals = [row[col] for row in rows]
        try:
            out[col] = np.array([float(v) if v != "" else np.nan for v in vals])
        except ValueError:
            out[col] = np.array(vals, dtype=object)
    return out


def _read_wigner(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cols = _read_csv_columns(path, ["x", "p", "w"])
    x_vals = np.unique(cols["x"])
    p_vals = np.unique(cols["p"])
    if x_vals.size * p_vals.size != cols["w"].size:
        raise FigureSpecError(f"{Path(path).name}: not a full rectangular grid")
    grid = np.full((x_vals.size, p_vals.size), np.nan)
    ix = np.searchsorted(x_vals, cols["x"])
    ip = np.searchsorted(p_vals, cols["p"])
    grid[ix, ip] = cols["w"]
    return x_vals, p_vals, grid


def _save(fig, out_path) -> None:
    out_path = Path(out_path)
    kwargs = {"dpi": 150}
    if out_path.suffix.lower() == ".svg":
        kwargs["metadata"] = {"Date": None}  # keep output byte-stable
    fig.savefig(out_path, **kwargs)
    plt.close(fig)


def _render_wigner_panel(spec, out_path):
    paths = spec["inputs"].get("wigner_csvs")
    if not paths:
        raise FigureSpecError("wigner_panel needs inputs.wigner_csvs")
    style = spec["style"]
    grids = [_read_wigner(p) for p in paths]
    vmax = float(style.get("vmax", WIGNER_BOUND))
    n = len(grids)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.0), squeeze=False)
    for ax, (x, p, w), path in zip(axes[0], grids, paths):
        # diverging colormap centered at zero so negativity is visible
        im = ax.pcolormesh(x, p, w.T, cmap=style.get("colormap", "RdBu_r"),
                           vmin=-vmax, vmax=vmax, shading="auto")
        ax.set_aspect("equal")
        ax.set_xlabel(r"$\mathrm{Re}(\alpha)$")
        ax.set_ylabel(r"$\mathrm{Im}(\alpha)$")
        ax.set_title(Path(path).stem, fontsize=9)
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.85, label=r"$W(\alpha)$")
    _save(fig, out_path)


def _snapshots(spec):
    path = spec["inputs"].get("fits_json")
    if not path:
        raise FigureSpecError("level_vs_cycle needs inputs.fits_json")
    if not Path(path).exists():
        raise FigureSpecError(f"input file {path} does not exist")
    with open(path) as fh:
        data = json.load(fh)
    snaps = data.get("snapshots")
    if not snaps:
        raise FigureSpecError(f"{Path(path).name}: no snapshots")
    for key in ("level_db",):
        if key not in snaps[0]:
            raise FigureSpecError(f"{Path(path).name}: snapshots lack {key!r}")
    return snaps


def _render_level_vs_cycle(spec, out_path):
    snaps = _snapshots(spec)
    xkey = "cycle" if "cycle" in snaps[0] else "step"
    xs = np.array([s[xkey] for s in snaps], dtype=float)
    levels = np.array([s["level_db"] for s in snaps], dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(xs, levels, "o", color="#1f77b4", label="fitted level")
    # straight-line fit in the linear region (below 60% of the peak)
    mask = levels < 0.6 * levels.max()
    if mask.sum() >= 2:
        slope, icpt = np.polyfit(xs[mask], levels[mask], 1)
        xf = np.linspace(xs.min(), xs.max(), 50)
        ax.plot(xf, slope * xf + icpt, "-", color="#d62728",
                label=f"{slope:.2f} dB/{xkey}")
    ax.set_xlabel(f"{xkey} number")
    ax.set_ylabel("squeezing level (dB)")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, out_path)


def _render_rate_inset(spec, out_path):
    path = spec["inputs"].get("sweep_csv")
    if not path:
        raise FigureSpecError("rate_inset needs inputs.sweep_csv")
    style = spec["style"]
    rate_col = style.get("rate_column", "rate_mhz")
    cols = _read_csv_columns(path, ["beta_sq", rate_col])
    fig, ax = plt.subplots(figsize=(4.0, 3.2))
    ax.loglog(cols["beta_sq"], cols[rate_col], "s", color="#1f77b4",
              label="extracted rate")
    kerr = style.get("kerr_mhz")
    if kerr is not None:
        bb = np.linspace(cols["beta_sq"].min(), cols["beta_sq"].max(), 60)
        ax.loglog(bb, kerr * bb, "-", color="#2ca02c",
                  label=r"ideal $K\beta^2$")
    ax.set_xlabel(r"$|\beta|^2$")
    ax.set_ylabel("squeezing rate (MHz)")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, out_path)


def _render_sweep_heatmap(spec, out_path):
    path = spec["inputs"].get("sweep_csv")
    if not path:
        raise FigureSpecError("sweep_heatmap needs inputs.sweep_csv")
    style = spec["style"]
    xcol = style.get("x_column", "delta_mhz")
    ycol = style.get("y_column", "omega_mhz")
    metrics = style.get("metrics", ["mean_infidelity", "rate_mhz", "n_max"])
    cols = _read_csv_columns(path, [xcol, ycol] + list(metrics))
    xs = np.unique(cols[xcol])
    ys = np.unique(cols[ycol])
    fig, axes = plt.subplots(1, len(metrics),
                             figsize=(3.4 * len(metrics), 3.0), squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        grid = np.full((xs.size, ys.size), np.nan)
        ix = np.searchsorted(xs, cols[xcol])
        iy = np.searchsorted(ys, cols[ycol])
        grid[ix, iy] = cols[metric]
        im = ax.pcolormesh(xs, ys, grid.T, cmap=style.get("colormap", "viridis"),
                           shading="auto")
        fig.colorbar(im, ax=ax, shrink=0.85)
        ax.set_xlabel(xcol)
        ax.set_ylabel(ycol)
        ax.set_title(metric, fontsize=9)
    fig.tight_layout()
    _save(fig, out_path)


def _render_period_fit(spec, out_path):
    path = spec["inputs"].get("sweep_csv")
    if not path:
        raise FigureSpecError("period_fit needs inputs.sweep_csv")
    style = spec["style"]
    kerr = style.get("kerr_mhz")
    if kerr is None:
        raise FigureSpecError("period_fit needs style.kerr_mhz")
    cols = _read_csv_columns(path, ["omega_mhz", "period_us"])
    omega = cols["omega_mhz"]
    period = cols["period_us"]
    ok = ~np.isnan(period)
    omega, period = omega[ok], period[ok]
    two_pi = 2.0 * math.pi
    u = (two_pi * kerr) ** (-1 / 3) * (two_pi * omega) ** (-2 / 3)
    a_fit, b_fit = np.polyfit(u, period, 1)
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(omega, period, "o", color="#1f77b4", label="extracted period")
    om_f = np.linspace(omega.min(), omega.max(), 80)
    u_f = (two_pi * kerr) ** (-1 / 3) * (two_pi * om_f) ** (-2 / 3)
    ax.plot(om_f, a_fit * u_f + b_fit, "--", color="#ff7f0e",
            label=rf"$a K^{{-1/3}}\Omega^{{-2/3}}+b$: a={a_fit:.2f}, b={b_fit:.2f}")
    ax.set_xlabel(r"$\Omega_d/2\pi$ (MHz)")
    ax.set_ylabel(r"$T_c$ ($\mu$s)")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _render_metrics_curve(spec, out_path):
    path = spec["inputs"].get("csv")
    if not path:
        raise FigureSpecError("metrics_curve needs inputs.csv")
    style = spec["style"]
    xcol = style.get("x_column")
    ycols = style.get("y_columns")
    if not xcol or not ycols:
        raise FigureSpecError("metrics_curve needs style.x_column and y_columns")
    cols = _read_csv_columns(path, [xcol] + list(ycols))
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for ycol in ycols:
        ax.plot(cols[xcol], cols[ycol], "o-", label=ycol)
    if style.get("log_y"):
        ax.set_yscale("log")
    ax.set_xlabel(xcol)
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, out_path)


_RENDERERS = {
    "wigner_panel": _render_wigner_panel,
    "level_vs_cycle": _render_level_vs_cycle,
    "rate_inset": _render_rate_inset,
    "sweep_heatmap": _render_sweep_heatmap,
    "period_fit": _render_period_fit,
    "metrics_curve": _render_metrics_curve,
}


def render(spec: dict, out_path) -> None:
    """Render one figure.  All inputs are validated before drawing starts."""
    kind = spec.get("kind")
    if kind not in _RENDERERS:
        raise FigureSpecError(f"unknown figure kind {kind!r}")
    spec = dict(spec)
    spec.setdefault("inputs", {})
    spec.setdefault("style", {})
    _RENDERERS[kind](spec, out_path)
