"""CSV / JSON / SVG artifacts for Monte Carlo reports.

CSV files start with ``# key=value`` comment lines echoing the configuration,
followed by a header row and one row per sweep point. Numbers are written with
12 significant digits; reports are rounded to the same precision when built,
so re-reading a file reproduces the in-memory values exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .montecarlo import MonteCarloReport, PdPoint

PD_COLUMNS = ("sweep_value", "pd", "stderr", "trials")
RMSE_COLUMNS = ("sweep_value", "rmse_size", "rmse_position", "detected", "trials")


def sig12(x):
    """Round to 12 significant digits (the on-disk precision)."""
    return float(f"{x:.12g}")


def _fmt(x):
    if isinstance(x, int):
        return str(x)
    return f"{x:.12g}"


def artifact_name(scenario, rule, metric, ext):
    return f"{scenario}_{rule}_{metric}.{ext}"


def _write_rows(path, columns, rows, echo):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, value in (echo or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def _read_rows(path):
    echo, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                echo[key] = value
            elif line.strip():
                lines.append(line)
    reader = csv.DictReader(lines)
    return list(reader), echo


def write_pd_csv(path, curve, echo=None):
    rows = [(p.sweep_value, p.pd, p.stderr, p.trials) for p in curve]
    return _write_rows(path, PD_COLUMNS, rows, echo)


def read_pd_csv(path):
    rows, echo = _read_rows(path)
    curve = [
        PdPoint(float(r["sweep_value"]), float(r["pd"]), float(r["stderr"]), int(r["trials"]))
        for r in rows
    ]
    return curve, echo


def write_rmse_csv(path, rows, echo=None):
    """``rows`` are dicts with the keys of :data:`RMSE_COLUMNS`."""
    return _write_rows(path, RMSE_COLUMNS, [tuple(r[c] for c in RMSE_COLUMNS) for r in rows], echo)


def read_rmse_csv(path):
    rows, echo = _read_rows(path)
    out = []
    for r in rows:
        out.append({
            "sweep_value": float(r["sweep_value"]),
            "rmse_size": float(r["rmse_size"]),
            "rmse_position": float(r["rmse_position"]),
            "detected": int(r["detected"]),
            "trials": int(r["trials"]),
        })
    return out, echo


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, MonteCarloReport):
        obj = obj.to_dict()
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True))
    return path


def read_report(path):
    return MonteCarloReport.from_dict(json.loads(Path(path).read_text()))


# -- SVG ----------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def write_svg(path, series, xlabel="", ylabel="", title="", ylim=None, width=640, height=420):
    """Polyline plot of ``{label: (xs, ys)}``; NaN points are skipped."""
    pad_l, pad_r, pad_t, pad_b = 60, 150, 30, 45
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = ylim if ylim else (min(p[1] for p in pts), max(p[1] for p in pts))
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return pad_t + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{pad_l + pw / 2}" y="18" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{pad_l + pw / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{pad_t + ph / 2}" text-anchor="middle" transform="rotate(-90 14 {pad_t + ph / 2})">{ylabel}</text>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{pad_t + ph + 15}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{pad_l - 5}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(y))
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = pad_t + 15 + 16 * i
        out.append(f'<line x1="{pad_l + pw + 10}" y1="{ly - 4}" x2="{pad_l + pw + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{pad_l + pw + 35}" y="{ly}">{label}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path
