"""CSV tables and SVG heatmaps."""

from __future__ import annotations

import csv
import json
from html import escape
from pathlib import Path

import numpy as np

from .optimizer import Heatmap

SWEEP_HEADER = ["r1", "r2", "objective", "q1", "q2"]
LOAD_HEADER = ["index", "target_prob", "learned_prob"]

# 8-step sequential palette, dark (low) to light (high)
PALETTE = ["#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725"]


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def write_sweep_csv(heatmap: Heatmap, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for i, r1 in enumerate(heatmap.axis1):
            for j, r2 in enumerate(heatmap.axis2):
                q1, q2 = heatmap.decision[i][j].q
                w.writerow([_fmt(r1), _fmt(r2), _fmt(heatmap.objective[i, j]), q1, q2])


def read_sweep_csv(path: Path):
    """Parse a sweep CSV back into ``(axis1, axis2, objective, decisions)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != SWEEP_HEADER:
        raise ValueError(f"unexpected header {rows[0]}")
    body = rows[1:]
    axis1 = sorted({float(r[0]) for r in body}, key=[float(r[0]) for r in body].index)
    axis2 = sorted({float(r[1]) for r in body}, key=[float(r[1]) for r in body].index)
    obj = np.array([float(r[2]) for r in body]).reshape(len(axis1), len(axis2))
    dec = [[(int(r[3]), int(r[4])) for r in body[i * len(axis2) : (i + 1) * len(axis2)]] for i in range(len(axis1))]
    return np.array(axis1), np.array(axis2), obj, dec


def render_sweep_svg(heatmap: Heatmap, title: str = "Expected profit") -> str:
    """Grid with r1 down the rows, r2 across the columns, one (q1, q2) label per cell."""
    n1, n2 = heatmap.axis1.size, heatmap.axis2.size
    cell, left, top = 64, 70, 50
    width, height = left + n2 * cell + 130, top + n1 * cell + 60
    obj = heatmap.objective
    lo, hi = float(obj.min()), float(obj.max())
    span = hi - lo

    def colour(v: float) -> int:
        return 0 if span <= 0 else min(int((v - lo) / span * len(PALETTE)), len(PALETTE) - 1)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="24" font-size="14">{escape(title)}</text>',
    ]
    for i in range(n1):
        # highest r1 at the top
        row = n1 - 1 - i
        y = top + row * cell
        out.append(
            f'<text x="{left - 8}" y="{y + cell / 2 + 4}" text-anchor="end">{heatmap.axis1[i]:.2f}</text>'
        )
        for j in range(n2):
            x = left + j * cell
            k = colour(obj[i, j])
            ink = "#ffffff" if k < 4 else "#000000"
            q1, q2 = heatmap.decision[i][j].q
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{PALETTE[k]}"/>')
            out.append(
                f'<text x="{x + cell / 2}" y="{y + cell / 2 - 2}" text-anchor="middle" fill="{ink}">({q1}, {q2})</text>'
            )
            out.append(
                f'<text x="{x + cell / 2}" y="{y + cell / 2 + 12}" text-anchor="middle" fill="{ink}" '
                f'font-size="9">{obj[i, j]:.3f}</text>'
            )
    base = top + n1 * cell
    for j in range(n2):
        out.append(
            f'<text x="{left + j * cell + cell / 2}" y="{base + 16}" text-anchor="middle">{heatmap.axis2[j]:.2f}</text>'
        )
    out.append(f'<text x="{left + n2 * cell / 2}" y="{base + 40}" text-anchor="middle">reliability r2</text>')
    out.append(
        f'<text x="16" y="{top + n1 * cell / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + n1 * cell / 2})">reliability r1</text>'
    )
    lx = left + n2 * cell + 20
    for k, col in enumerate(PALETTE):
        y = top + (len(PALETTE) - 1 - k) * 20
        v = lo + span * k / len(PALETTE)
        out.append(f'<rect x="{lx}" y="{y}" width="18" height="20" fill="{col}"/>')
        out.append(f'<text x="{lx + 24}" y="{y + 14}">{v:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_load_csv(target: np.ndarray, learned: np.ndarray, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOAD_HEADER)
        for i, (t, l) in enumerate(zip(target, learned)):
            w.writerow([i, _fmt(t), _fmt(l)])


def write_json(record: dict, path: Path) -> None:
    path.write_text(json.dumps(record, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
