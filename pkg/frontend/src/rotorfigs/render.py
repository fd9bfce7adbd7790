"""Render one figure from a sweep CSV per spec; matplotlib Agg backend."""

from __future__ import annotations

import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .figspec import FigureSpec  # noqa: E402


def read_csv(path: str):
    """Header and string rows of a sweep CSV, skipping manifest comment lines."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        table = list(reader)
    if not table:
        raise ValueError(f"{path}: no header row found")
    header, rows = table[0], table[1:]
    if not rows:
        raise ValueError(f"{path}: CSV body is empty, nothing to plot")
    return header, rows


def _column(header, rows, name, path, numeric=True):
    if name not in header:
        raise ValueError(f"{path}: column {name!r} not in header {header}")
    idx = header.index(name)
    values = [row[idx] for row in rows]
    if not numeric:
        return values
    return np.array([float(v) if v not in ("", "nan") else np.nan for v in values])


def _finish(fig, ax, spec: FigureSpec):
    if spec.get("axes.xlabel"):
        ax.set_xlabel(spec.get("axes.xlabel"))
    if spec.get("axes.ylabel"):
        ax.set_ylabel(spec.get("axes.ylabel"))
    if spec.get("axes.title"):
        ax.set_title(spec.get("axes.title"))
    ax.set_xscale(spec.get("axes.xscale"))
    if spec.kind == "lines":
        ax.set_yscale(spec.get("axes.yscale"))
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=150)
    meta = {"output": spec.output_path,
            "size_px": [int(v) for v in fig.get_size_inches() * fig.dpi],
            "xlabel": ax.get_xlabel(), "ylabel": ax.get_ylabel(),
            "title": ax.get_title()}
    plt.close(fig)
    return meta


def _render_lines(spec: FigureSpec, header, rows):
    x_name = spec.get("lines.x") or header[0]
    y_names = [n.strip() for n in spec.get("lines.y").split(",") if n.strip()]
    if not y_names:
        y_names = [n for n in header[1:] if n not in ("error",)]
    x = _column(header, rows, x_name, spec.input_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name in y_names:
        y = _column(header, rows, name, spec.input_csv)
        if name == "barrier":
            ax.plot(x, y, "k:", label=name)   # barrier overlays as dotted black
        else:
            ax.plot(x, y, label=name)
    if len(y_names) > 1:
        ax.legend(fontsize=8, ncols=2)
    return _finish(fig, ax, spec)


def _render_heatmap(spec: FigureSpec, header, rows):
    x_name, y_name = spec.get("heatmap.x"), spec.get("heatmap.y")
    v_name = spec.get("heatmap.value")
    for name in (x_name, y_name, v_name):
        if not name:
            raise ValueError("heatmap needs heatmap.x, heatmap.y and heatmap.value")
    x = _column(header, rows, x_name, spec.input_csv)
    y = _column(header, rows, y_name, spec.input_csv)
    v = _column(header, rows, v_name, spec.input_csv)
    xs, ys = np.unique(x), np.unique(y)
    grid = np.full((ys.size, xs.size), np.nan)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    grid[yi, xi] = v

    mask_name = spec.get("heatmap.mask")
    if mask_name:
        flags = _column(header, rows, mask_name, spec.input_csv, numeric=False)
        masked = np.zeros((ys.size, xs.size), dtype=bool)
        for k, flag in enumerate(flags):
            if flag.strip() == "0":
                masked[yi[k], xi[k]] = True
        grid = np.ma.masked_where(masked, grid)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    cmap = plt.get_cmap(spec.get("heatmap.cmap")).copy()
    cmap.set_bad("gray")   # out-of-regime cells render gray
    extent = (xs.min(), xs.max(), ys.min(), ys.max())
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap=cmap, extent=extent)
    fig.colorbar(im, ax=ax, label=v_name)
    if not spec.get("axes.xlabel"):
        ax.set_xlabel(x_name)
    if not spec.get("axes.ylabel"):
        ax.set_ylabel(y_name)
    return _finish(fig, ax, spec)


def _render_bars(spec: FigureSpec, header, rows):
    labels = _column(header, rows, spec.get("bars.label"), spec.input_csv,
                     numeric=False)
    values = _column(header, rows, spec.get("bars.value"), spec.input_csv,
                     numeric=False)
    pairs = [(lab, float(val)) for lab, val in zip(labels, values)
             if val.strip() not in ("", "nan") and float(val) > 0.0]
    if not pairs:
        raise ValueError(f"{spec.input_csv}: no positive values to draw as bars")
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    names = [p[0] for p in pairs]
    vals = [p[1] for p in pairs]
    ax.bar(range(len(vals)), vals)
    ax.set_xticks(range(len(vals)), names, rotation=30, ha="right", fontsize=8)
    if spec.get("bars.log").lower() in ("true", "1", "yes"):
        ax.set_yscale("log")
    return _finish(fig, ax, spec)


def render(spec: FigureSpec) -> dict:
    """Write the figure described by the spec; returns image metadata."""
    header, rows = read_csv(spec.input_csv)
    if spec.kind == "lines":
        return _render_lines(spec, header, rows)
    if spec.kind == "heatmap":
        return _render_heatmap(spec, header, rows)
    return _render_bars(spec, header, rows)
