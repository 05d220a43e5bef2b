"""Step charts of per-processor remaining work over time.

Input is the cost analyzer's timeline CSV (header
``time_ns,processor,remaining_ops``, one row per processor after every
completion event); output is a self-contained SVG.  The SVG is written by
hand rather than through a plotting library so that rendering is a pure
function of the CSV text and the options: identical input gives
byte-identical output.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

__all__ = ["SchemaError", "Series", "read_timeline", "render_text"]

HEADER = ["time_ns", "processor", "remaining_ops"]

# matplotlib's tab10, a palette with well-separated hues
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


class SchemaError(ValueError):
    """The CSV does not match the timeline schema."""


@dataclass(frozen=True)
class Series:
    """One processor's remaining-operations curve, change points only."""

    processor: int
    points: tuple[tuple[float, int], ...]   # (time in us, remaining)


def read_timeline(text: str) -> list[tuple[float, int, int]]:
    """Parse and validate the CSV; a fully empty file parses to no rows.

    Raises :class:`SchemaError` for a bad header, wrong field counts,
    non-numeric fields, negative counts, or time going backwards.
    """
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:       # pragma: no cover - caught by strip() above
        return []
    if header != HEADER:
        raise SchemaError(f"expected header {','.join(HEADER)!r}, "
                          f"got {','.join(header)!r}")
    rows: list[tuple[float, int, int]] = []
    prev_t = -math.inf
    for lineno, rec in enumerate(reader, start=2):
        if not rec:             # tolerate blank lines (trailing newline etc.)
            continue
        if len(rec) != 3:
            raise SchemaError(f"line {lineno}: expected 3 fields, got {len(rec)}")
        try:
            t = float(rec[0])
            p = int(rec[1])
            r = int(rec[2])
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
        if not math.isfinite(t) or t < 0:
            raise SchemaError(f"line {lineno}: bad time_ns {rec[0]!r}")
        if p < 0 or r < 0:
            raise SchemaError(f"line {lineno}: negative value")
        if t < prev_t:
            raise SchemaError(f"line {lineno}: time_ns decreases "
                              f"({t} after {prev_t})")
        prev_t = t
        rows.append((t, p, r))
    return rows


def _series(rows: list[tuple[float, int, int]]) -> list[Series]:
    """Group by processor and keep only the points where the count changes
    (plus the final timestamp, so every line spans the whole run)."""
    by_proc: dict[int, list[tuple[float, int]]] = {}
    for t, p, r in rows:
        by_proc.setdefault(p, []).append((t / 1000.0, r))
    out = []
    for p in sorted(by_proc):
        pts = by_proc[p]
        kept = [pts[0]]
        for t, r in pts[1:]:
            if r != kept[-1][1]:
                kept.append((t, r))
        if pts[-1][0] > kept[-1][0]:
            kept.append((pts[-1][0], kept[-1][1]))
        out.append(Series(p, tuple(kept)))
    return out


# ---------------------------------------------------------------------------
# SVG assembly
# ---------------------------------------------------------------------------

W, H = 900, 480
PX0, PX1 = 64, W - 24          # plot area, x
PY0, PY1 = 40, H - 52          # plot area, y (PY0 is the top)


def _nice_step(span: float, target: int = 6) -> float:
    """A 1-2-5 ladder step giving roughly `target` ticks over `span`."""
    raw = span / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _ticks(hi: float) -> list[float]:
    step = _nice_step(hi)
    n = int(math.floor(hi / step + 1e-9))
    return [i * step for i in range(n + 1)]


def _fmt_val(v: float) -> str:
    return str(int(v)) if v == int(v) else f"{v:g}"


def render_text(text: str, *, title: str | None = None,
                procs: list[int] | None = None,
                allow_empty: bool = False) -> str:
    """Render a timeline CSV to an SVG step chart.

    `procs` keeps only the listed processors; naming one that is absent
    from the CSV is an error rather than a silently missing line.
    """
    rows = read_timeline(text)
    if not rows and not allow_empty:
        raise SchemaError("timeline has no data rows (--allow-empty renders "
                          "an empty chart)")
    series = _series(rows)
    if procs is not None:
        have = {s.processor for s in series}
        missing = sorted(set(procs) - have)
        if missing:
            raise SchemaError("processors not in timeline: "
                              + ", ".join(str(p) for p in missing))
        keep = set(procs)
        series = [s for s in series if s.processor in keep]
    return _svg(series, title)


def _svg(series: list[Series], title: str | None) -> str:
    tmax = max((s.points[-1][0] for s in series), default=0.0)
    rmax = max((r for s in series for _, r in s.points), default=0)
    xhi = tmax if tmax > 0 else 1.0
    ystep_src = max(rmax, 1)
    ytop = max(_nice_step(ystep_src) * math.ceil(ystep_src / _nice_step(ystep_src)),
               1.0)

    def sx(t: float) -> float:
        return PX0 + (PX1 - PX0) * (t / xhi)

    def sy(r: float) -> float:
        return PY1 - (PY1 - PY0) * (r / ytop)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="#ffffff"/>',
    ]
    if title is not None:
        out.append(f'<text x="{(PX0 + PX1) / 2:.2f}" y="24" font-family="sans-serif" '
                   f'font-size="15" text-anchor="middle">{escape(title)}</text>')

    for v in _ticks(ytop):
        y = sy(v)
        out.append(f'<line x1="{PX0}" y1="{y:.2f}" x2="{PX1}" y2="{y:.2f}" '
                   f'stroke="#e0e0e0" stroke-width="1"/>')
        out.append(f'<text x="{PX0 - 8}" y="{y + 4:.2f}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="end">{_fmt_val(v)}</text>')
    for v in _ticks(xhi):
        x = sx(v)
        out.append(f'<line x1="{x:.2f}" y1="{PY1}" x2="{x:.2f}" y2="{PY1 + 4}" '
                   f'stroke="#333333" stroke-width="1"/>')
        out.append(f'<text x="{x:.2f}" y="{PY1 + 18}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{_fmt_val(v)}</text>')

    out.append(f'<line x1="{PX0}" y1="{PY0}" x2="{PX0}" y2="{PY1}" '
               f'stroke="#333333" stroke-width="1"/>')
    out.append(f'<line x1="{PX0}" y1="{PY1}" x2="{PX1}" y2="{PY1}" '
               f'stroke="#333333" stroke-width="1"/>')
    out.append(f'<text x="{(PX0 + PX1) / 2:.2f}" y="{H - 12}" '
               f'font-family="sans-serif" font-size="12" '
               f'text-anchor="middle">time (µs)</text>')
    out.append(f'<text x="16" y="{(PY0 + PY1) / 2:.2f}" font-family="sans-serif" '
               f'font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {(PY0 + PY1) / 2:.2f})">'
               f'remaining operations</text>')

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        (t0, r0) = s.points[0]
        d = [f"M {sx(t0):.2f} {sy(r0):.2f}"]
        prev_r = r0
        for t, r in s.points[1:]:
            d.append(f"L {sx(t):.2f} {sy(prev_r):.2f}")     # hold, then drop
            if r != prev_r:
                d.append(f"L {sx(t):.2f} {sy(r):.2f}")
            prev_r = r
        out.append(f'<path class="series" data-processor="{s.processor}" '
                   f'd="{" ".join(d)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')

    if series:
        lx, ly = PX1 - 150, PY0 + 10
        for i, s in enumerate(series):
            color = PALETTE[i % len(PALETTE)]
            y = ly + 16 * i
            out.append(f'<line x1="{lx}" y1="{y:.2f}" x2="{lx + 24}" '
                       f'y2="{y:.2f}" stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{lx + 30}" y="{y + 4:.2f}" '
                       f'font-family="sans-serif" font-size="11">'
                       f'processor {s.processor}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
