"""CSV, SVG and metadata output for experiment results.

Everything written here is byte-deterministic: floats are printed with
``repr`` (shortest round-tripping form), rows follow the condition order
of the run, and no timestamps are recorded. SVG marks carry their values
in ``data-*`` attributes so the figures can be read back numerically.
"""
from __future__ import annotations

import csv
import io
import json
import os
from collections import OrderedDict
from typing import Iterable, Optional, Sequence, Union
from xml.sax.saxutils import quoteattr, escape

from . import __version__
from .conditions import BASELINE, parse_condition
from .pipeline import E1Result, ExperimentConfig, StabilityReport
from .stats import BoxStats

STABILITY_HEADER = ["matcher", "condition", "r", "normalized"]
BOXSTATS_HEADER = ["matcher", "condition", "n", "mean", "q1", "median", "q3", "iqr",
                   "lower_whisker", "upper_whisker", "n_outliers", "outliers"]

_W, _H = 720, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 40, 90
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _f(v: float) -> str:
    return repr(float(v))


def _c(v: float) -> str:
    return "%.2f" % v


def _csv_text(rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _write(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# -- CSV ---------------------------------------------------------------------

def stability_csv(reports: Sequence[StabilityReport]) -> str:
    rows = [STABILITY_HEADER]
    for rep in reports:
        norm = dict(rep.falloff)
        for cond, r in rep.correlations:
            rows.append([rep.matcher, cond.tag, _f(r), _f(norm[cond])])
    return _csv_text(rows)


def ium_csv(rep: StabilityReport) -> str:
    conds = [c for c, _ in rep.correlations]
    rows = [["subject", "reference"] + [c.tag for c in conds]]
    for i, sid in enumerate(rep.subjects):
        rows.append([sid, _f(rep.reference_ium[i])] + [_f(rep.varied_ium[c][i]) for c in conds])
    return _csv_text(rows)


def boxstats_csv(results: Sequence[E1Result]) -> str:
    rows = [BOXSTATS_HEADER]
    for res in results:
        for row in res.rows:
            b = row.stats
            rows.append([res.matcher, row.condition.tag, b.n, _f(b.mean), _f(b.q1), _f(b.median),
                         _f(b.q3), _f(b.iqr), _f(b.lower_whisker), _f(b.upper_whisker),
                         len(b.outliers), ";".join(_f(o) for o in b.outliers)])
    return _csv_text(rows)


def impostor_scores_csv(results: Sequence[E1Result]) -> str:
    rows = [["matcher", "condition", "gallery_id", "score"]]
    for res in results:
        for row in res.rows:
            rows.extend([res.matcher, row.condition.tag, g, _f(s)]
                        for g, s in zip(row.gallery_ids, row.scores))
    return _csv_text(rows)


def read_stability_csv(path) -> list[StabilityReport]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != STABILITY_HEADER:
        raise ValueError(f"{path}: not a stability.csv file")
    grouped: "OrderedDict[str, list]" = OrderedDict()
    for row in rows[1:]:
        grouped.setdefault(row[0], []).append((parse_condition(row[1]), float(row[2])))
    return [StabilityReport(m, tuple(c)) for m, c in grouped.items()]


def read_boxstats_csv(path) -> list[tuple[str, str, BoxStats]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != BOXSTATS_HEADER:
        raise ValueError(f"{path}: not a boxstats.csv file")
    out = []
    for row in rows[1:]:
        outliers = tuple(float(v) for v in row[11].split(";") if v)
        b = BoxStats(n=int(row[2]), mean=float(row[3]), q1=float(row[4]), median=float(row[5]),
                     q3=float(row[6]), iqr=float(row[7]), lower_whisker=float(row[8]),
                     upper_whisker=float(row[9]), outliers=outliers)
        out.append((row[0], row[1], b))
    return out


# -- SVG ---------------------------------------------------------------------

class _Axes:
    def __init__(self, n: int, lo: float, hi: float):
        self.n, self.lo, self.hi = n, lo, hi

    def x(self, i: int) -> float:
        span = _W - _LEFT - _RIGHT
        return _LEFT + span * (i + 0.5) / max(self.n, 1)

    def y(self, v: float) -> float:
        span = _H - _TOP - _BOTTOM
        return _TOP + span * (self.hi - v) / (self.hi - self.lo)


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _frame(ax: _Axes, title: str, ylabel: str, labels: Sequence[str]) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_H - _BOTTOM}" stroke="black"/>',
        f'<line x1="{_LEFT}" y1="{_H - _BOTTOM}" x2="{_W - _RIGHT}" y2="{_H - _BOTTOM}" stroke="black"/>',
        f'<text x="16" y="{(_H - _BOTTOM + _TOP) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_H - _BOTTOM + _TOP) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(ax.lo, ax.hi):
        y = ax.y(t)
        out.append(f'<line x1="{_LEFT - 4}" y1="{_c(y)}" x2="{_W - _RIGHT}" y2="{_c(y)}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{_c(y + 4)}" text-anchor="end">{t:.2f}</text>')
    for i, lab in enumerate(labels):
        x = ax.x(i)
        yb = _H - _BOTTOM + 12
        out.append(f'<text x="{_c(x)}" y="{yb}" text-anchor="end" '
                   f'transform="rotate(-40 {_c(x)} {yb})">{escape(lab)}</text>')
    return out


def falloff_svg(reports: Sequence[StabilityReport], title: str = "Normalized correlation fall-off") -> str:
    """Line plot of r / r(baseline) per condition, one series per matcher."""
    labels: list[str] = []
    for rep in reports:
        for c, _ in rep.correlations:
            if c.tag not in labels:
                labels.append(c.tag)
    values = [v for rep in reports for _, v in rep.falloff]
    lo = min(0.0, min(values, default=0.0))
    hi = max(1.1, max(values, default=1.0) + 0.05)
    ax = _Axes(len(labels), lo, hi)
    out = _frame(ax, title, "normalized correlation", labels)
    out.append(f'<line class="anchor" x1="{_LEFT}" y1="{_c(ax.y(1.0))}" x2="{_W - _RIGHT}" '
               f'y2="{_c(ax.y(1.0))}" stroke="#999999" stroke-dasharray="4 3"/>')
    for k, rep in enumerate(reports):
        color = _COLORS[k % len(_COLORS)]
        raw = dict(rep.correlations)
        pts = [(labels.index(c.tag), v, c) for c, v in rep.falloff]
        path = " ".join(f"{_c(ax.x(i))},{_c(ax.y(v))}" for i, v, _ in pts)
        out.append(f'<g class="series" data-matcher={quoteattr(rep.matcher)} '
                   f'data-baseline-r="{_f(raw[BASELINE])}">')
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for i, v, c in pts:
            out.append(f'<circle class="point" cx="{_c(ax.x(i))}" cy="{_c(ax.y(v))}" r="3.5" '
                       f'fill="{color}" data-condition={quoteattr(c.tag)} '
                       f'data-r="{_f(raw[c])}" data-normalized="{_f(v)}"/>')
            out.append(f'<text x="{_c(ax.x(i) + 5)}" y="{_c(ax.y(v) - 5)}" fill="{color}">'
                       f'{v:.3f}</text>')
        out.append("</g>")
        ly = _TOP + 14 * k
        out.append(f'<text x="{_W - _RIGHT - 4}" y="{ly + 4}" text-anchor="end" fill="{color}">'
                   f'{escape(rep.matcher)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def boxplot_svg(boxes: Sequence[tuple[str, BoxStats]], title: str = "Impostor score distribution") -> str:
    """Box plot (hinges, median, 1.5 IQR whiskers, outlier points) per condition."""
    lows = [min([b.lower_whisker, *b.outliers]) for _, b in boxes]
    highs = [max([b.upper_whisker, *b.outliers]) for _, b in boxes]
    lo, hi = min(lows, default=0.0), max(highs, default=1.0)
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    ax = _Axes(len(boxes), lo - pad, hi + pad)
    out = _frame(ax, title, "impostor score", [lab for lab, _ in boxes])
    half = min(18.0, 0.3 * (_W - _LEFT - _RIGHT) / max(len(boxes), 1))
    for i, (lab, b) in enumerate(boxes):
        x = ax.x(i)
        attrs = " ".join(f'data-{k}="{_f(getattr(b, k))}"' for k in
                         ("q1", "median", "q3", "iqr", "lower_whisker", "upper_whisker", "mean"))
        out.append(f'<g class="box" data-condition={quoteattr(lab)} data-n="{b.n}" {attrs}>')
        out.append(f'<line x1="{_c(x)}" y1="{_c(ax.y(b.upper_whisker))}" x2="{_c(x)}" '
                   f'y2="{_c(ax.y(b.q3))}" stroke="black"/>')
        out.append(f'<line x1="{_c(x)}" y1="{_c(ax.y(b.q1))}" x2="{_c(x)}" '
                   f'y2="{_c(ax.y(b.lower_whisker))}" stroke="black"/>')
        for w in (b.upper_whisker, b.lower_whisker):
            out.append(f'<line x1="{_c(x - half / 2)}" y1="{_c(ax.y(w))}" x2="{_c(x + half / 2)}" '
                       f'y2="{_c(ax.y(w))}" stroke="black"/>')
        top, bot = ax.y(b.q3), ax.y(b.q1)
        out.append(f'<rect x="{_c(x - half)}" y="{_c(top)}" width="{_c(2 * half)}" '
                   f'height="{_c(max(bot - top, 0.5))}" fill="#cfe2f3" stroke="black"/>')
        out.append(f'<line class="median" x1="{_c(x - half)}" y1="{_c(ax.y(b.median))}" '
                   f'x2="{_c(x + half)}" y2="{_c(ax.y(b.median))}" stroke="black" stroke-width="2"/>')
        for o in b.outliers:
            out.append(f'<circle class="outlier" cx="{_c(x)}" cy="{_c(ax.y(o))}" r="2" '
                       f'fill="none" stroke="black" data-value="{_f(o)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- bundle ------------------------------------------------------------------

Result = Union[StabilityReport, E1Result]


def emit_report(report: Union[Result, Sequence[Result]], output_dir,
                config: Optional[ExperimentConfig] = None) -> list[str]:
    """Write every artifact for ``report`` into ``output_dir``.

    E2 results give ``stability.csv``, ``ium.csv`` and ``falloff.svg``;
    E1 results give ``boxstats.csv``, ``impostor_scores.csv`` and
    ``boxplot.svg``. ``run.json`` records the configuration and toolkit
    version. Returns the written paths.
    """
    items = [report] if isinstance(report, (StabilityReport, E1Result)) else list(report)
    e2 = [r for r in items if isinstance(r, StabilityReport)]
    e1 = [r for r in items if isinstance(r, E1Result)]
    os.makedirs(output_dir, exist_ok=True)
    p = lambda name: os.path.join(output_dir, name)
    written = []
    if e2:
        written.append(_write(p("stability.csv"), stability_csv(e2)))
        if len(e2) == 1 and e2[0].subjects:
            written.append(_write(p("ium.csv"), ium_csv(e2[0])))
        written.append(_write(p("falloff.svg"), falloff_svg(e2)))
    if e1:
        written.append(_write(p("boxstats.csv"), boxstats_csv(e1)))
        written.append(_write(p("impostor_scores.csv"), impostor_scores_csv(e1)))
        boxes = [((f"{r.matcher}/" if len(e1) > 1 else "") + row.condition.tag, row.stats)
                 for r in e1 for row in r.rows]
        written.append(_write(p("boxplot.svg"), boxplot_svg(boxes)))
    meta = {
        "toolkit": "impostorkit",
        "version": __version__,
        "config": None if config is None else config.as_dict(),
        "seed": None if config is None else config.master_seed,
        "files": sorted(os.path.basename(w) for w in written),
    }
    written.append(_write(p("run.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n"))
    return written


def rerender(output_dir) -> list[str]:
    """Regenerate the SVG figures from CSV files already in ``output_dir``."""
    written = []
    stab = os.path.join(output_dir, "stability.csv")
    box = os.path.join(output_dir, "boxstats.csv")
    if os.path.exists(stab):
        written.append(_write(os.path.join(output_dir, "falloff.svg"),
                              falloff_svg(read_stability_csv(stab))))
    if os.path.exists(box):
        rows = read_boxstats_csv(box)
        multi = len({m for m, _, _ in rows}) > 1
        written.append(_write(os.path.join(output_dir, "boxplot.svg"),
                              boxplot_svg([((f"{m}/" if multi else "") + c, b) for m, c, b in rows])))
    if not written:
        raise FileNotFoundError(f"no stability.csv or boxstats.csv in {output_dir}")
    return written
