"""Dependency-free SVG rendering of trajectory, histogram and convergence CSVs."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
WIDTH, HEIGHT, MARGIN = 640, 480, 48


class PlotInputError(ValueError):
    pass


def read_csv(path, required: Sequence[str]) -> list[dict[str, float]]:
    """Rows as floats; raises PlotInputError naming the offending line."""
    path = Path(path)
    try:
        f = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise PlotInputError(f"{path}: cannot read: {exc.strerror}") from None
    with f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise PlotInputError(f"{path}: line 1: missing header")
        missing = [c for c in required if c not in header]
        if missing:
            raise PlotInputError(f"{path}: line 1: missing column(s) {', '.join(missing)}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise PlotInputError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                rows.append({k: float(v) for k, v in zip(header, rec)})
            except ValueError:
                raise PlotInputError(f"{path}: line {lineno}: non-numeric field") from None
    if not rows:
        raise PlotInputError(f"{path}: no data rows after header")
    return rows


@dataclass
class _Frame:
    x0: float
    x1: float
    y0: float
    y1: float

    @classmethod
    def fit(cls, xs, ys, equal: bool = False, pad: float = 0.05):
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        if equal:
            span = max(x1 - x0, y1 - y0)
            cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
            x0, x1, y0, y1 = cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2
        px, py = pad * (x1 - x0), pad * (y1 - y0)
        return cls(x0 - px, x1 + px, y0 - py, y1 + py)

    def sx(self, x):
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def sy(self, y):
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _doc(body: list[str], title: str, xlabel: str, ylabel: str) -> str:
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<title>{title}</title>',
            f'<line class="axis" x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
            f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
            f'<line class="axis" x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" '
            f'stroke="black"/>',
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
            f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {HEIGHT / 2})">{ylabel}</text>']
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _ticks(frame: _Frame) -> list[str]:
    out = []
    for k in range(5):
        x = frame.x0 + k * (frame.x1 - frame.x0) / 4
        y = frame.y0 + k * (frame.y1 - frame.y0) / 4
        out.append(f'<text x="{_f(frame.sx(x))}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle" '
                   f'font-size="10">{x:.4g}</text>')
        out.append(f'<text x="{MARGIN - 4}" y="{_f(frame.sy(y))}" text-anchor="end" '
                   f'font-size="10">{y:.4g}</text>')
    return out


def trajectory_svg(rows, markers: Optional[Sequence[tuple[float, float]]] = None) -> str:
    """One polyline per agent, coloured by group; optional square markers (goals, grid)."""
    paths: dict[int, list[tuple[float, float]]] = {}
    group: dict[int, int] = {}
    for r in rows:
        a = int(r["agent_id"])
        paths.setdefault(a, []).append((r["x"], r["y"]))
        group[a] = int(r["group"])
    markers = list(markers or [])
    xs = [p[0] for pts in paths.values() for p in pts] + [m[0] for m in markers]
    ys = [p[1] for pts in paths.values() for p in pts] + [m[1] for m in markers]
    frame = _Frame.fit(xs, ys, equal=True)
    body = _ticks(frame)
    for a in sorted(paths):
        pts = " ".join(f"{_f(frame.sx(x))},{_f(frame.sy(y))}" for x, y in paths[a])
        color = PALETTE[group[a] % len(PALETTE)]
        body.append(f'<polyline class="agent" data-agent="{a}" points="{pts}" fill="none" '
                    f'stroke="{color}" stroke-width="1"/>')
        x, y = paths[a][-1]
        body.append(f'<circle cx="{_f(frame.sx(x))}" cy="{_f(frame.sy(y))}" r="3" fill="{color}"/>')
    for x, y in markers:
        body.append(f'<path class="marker" d="M {_f(frame.sx(x) - 3)} {_f(frame.sy(y) - 3)} h 6 v 6 h -6 z" '
                    f'fill="black"/>')
    return _doc(body, "trajectories", "x [m]", "y [m]")


def _star(cx: float, cy: float, r: float = 8.0) -> str:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else r * 0.45
        ang = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{_f(cx + rad * math.cos(ang))},{_f(cy + rad * math.sin(ang))}")
    return f'<polygon class="star" points="{" ".join(pts)}" fill="gold" stroke="black"/>'


def histogram_svg(rows, star_at: Optional[float] = None) -> str:
    """Bars for bin_lo,bin_hi,count rows; optional star marking e.g. an optimized cost."""
    xs = [r["bin_lo"] for r in rows] + [r["bin_hi"] for r in rows]
    if star_at is not None:
        xs.append(star_at)
    frame = _Frame.fit(xs, [0.0] + [r["count"] for r in rows], pad=0.02)
    frame.y0 = 0.0
    body = _ticks(frame)
    for r in rows:
        x0, x1 = frame.sx(r["bin_lo"]), frame.sx(r["bin_hi"])
        y = frame.sy(r["count"])
        body.append(f'<rect class="bar" x="{_f(x0)}" y="{_f(y)}" width="{_f(max(x1 - x0, 0.5))}" '
                    f'height="{_f(frame.sy(0) - y)}" fill="#4c72b0" stroke="white"/>')
    if star_at is not None:
        body.append(_star(frame.sx(star_at), frame.sy(0) - 10))
    return _doc(body, "cost histogram", "cost", "count")


def convergence_svg(rows) -> str:
    xs = [r["eval_index"] for r in rows]
    ys = [r["incumbent_cost"] for r in rows]
    frame = _Frame.fit(xs, ys + [r["cost"] for r in rows if r["cost"] < 1e9])
    body = _ticks(frame)
    for r in rows:
        if r["cost"] < 1e9:
            body.append(f'<circle class="eval" cx="{_f(frame.sx(r["eval_index"]))}" '
                        f'cy="{_f(frame.sy(r["cost"]))}" r="2" fill="#999999"/>')
    pts = " ".join(f"{_f(frame.sx(x))},{_f(frame.sy(y))}" for x, y in zip(xs, ys))
    body.append(f'<polyline class="incumbent" points="{pts}" fill="none" stroke="#d62728" '
                f'stroke-width="2"/>')
    return _doc(body, "optimization convergence", "evaluation", "cost")


PLOT_KINDS = {
    "trajectory": (("agent_id", "group", "x", "y"), trajectory_svg),
    "histogram": (("bin_lo", "bin_hi", "count"), histogram_svg),
    "convergence": (("eval_index", "cost", "incumbent_cost"), convergence_svg),
}
