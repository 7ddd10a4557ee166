"""Deterministic CSV / JSON / SVG writers for artifact bundles."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path: str | Path, header, rows) -> Path:
    """Write rows with round-trip float formatting (byte-identical for equal data)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def columns(*cols):
    """Rows from equal-length column arrays."""
    return zip(*cols)


def read_csv(path: str | Path) -> dict:
    """Columns of a CSV written by write_csv as float arrays (strings kept as-is)."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [row for row in r]
    out = {}
    for j, name in enumerate(header):
        col = [row[j] for row in data]
        try:
            out[name] = np.array([float(c) if c != "" else np.nan for c in col])
        except ValueError:
            out[name] = col
    return out


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return [_jsonable(v) for v in o.tolist()]
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        if np.isnan(o) or np.isinf(o):
            return str(o)
        return o
    return o


def versions() -> dict:
    import scipy

    from . import __version__, kernels

    return {"sharplimit": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "kernel_backend": kernels.BACKEND}


def write_manifest(path: str | Path, manifest: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


def write_svg(path: str | Path, curves, width: int = 480, height: int = 360,
              labels=("x", "y")) -> Path:
    """Minimal SVG line plot: curves is a list of (x, y) array pairs."""
    path = Path(path)
    xs = np.concatenate([np.asarray(c[0], dtype=float) for c in curves])
    ys = np.concatenate([np.asarray(c[1], dtype=float) for c in curves])
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = xs[ok].min(), xs[ok].max()
    y0, y1 = ys[ok].min(), ys[ok].max()
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    m = 40
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect x="{m}" y="{m / 2}" width="{width - 1.5 * m}" height="{height - 1.5 * m}" '
             'fill="none" stroke="#888"/>']
    for k, (cx, cy) in enumerate(curves):
        cx, cy = np.asarray(cx, dtype=float), np.asarray(cy, dtype=float)
        px = m + (cx - x0) / (x1 - x0) * (width - 1.5 * m)
        py = height - m + (y0 - cy) / (y1 - y0) * (height - 1.5 * m)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py) if np.isfinite(a + b))
        parts.append(f'<polyline fill="none" stroke="{colors[k % 4]}" points="{pts}"/>')
    parts.append(f'<text x="{width / 2}" y="{height - 8}">{labels[0]} [{x0:.3g}, {x1:.3g}]</text>')
    parts.append(f'<text x="4" y="14">{labels[1]} [{y0:.3g}, {y1:.3g}]</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path
