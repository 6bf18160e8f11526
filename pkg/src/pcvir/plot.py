"""Static SVG box plot of per-group importance coefficients."""

from xml.sax.saxutils import escape

import numpy as np

BAND_FILL = {"strong": "#d9f2d9", "moderate": "#fff4c2", "none": "#f8d7d7"}


def box_stats(values):
    """Median, quartiles (linear interpolation), 1.5*IQR whiskers, outliers and mean."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    return {
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": [float(x) for x in v if x < lo_fence or x > hi_fence],
        "mean": float(v.mean()),
    }


def _nice_limit(x):
    if x <= 0:
        return 1.0
    step = 10 ** np.floor(np.log10(x))
    for m in (1, 2, 2.5, 5, 10):
        if m * step >= x:
            return float(m * step)
    return float(10 * step)


def _ticks(limit):
    raw = limit / 4
    step = _nice_limit(raw)
    n = int(np.floor(limit / step + 1e-9))
    return [k * step for k in range(-n, n + 1)]


def coefficient_boxplot_svg(result, width=None, height=420, title=None):
    """Render a fitted :class:`GroupedPcvirResult` as an SVG 1.1 string.

    Variables run left to right by descending mean absolute coefficient; each
    column is shaded by its importance band, dotted lines mark the moderate
    threshold and dashed lines the strong threshold.
    """
    order = list(result.display_order)
    index = {v: j for j, v in enumerate(result.variables)}
    per_var = {v: [g.coefficients.z_prime[index[v]] for g in result.groups.values()]
               for v in order}
    bands = {v: result.classification.bands[index[v]] for v in order}
    thr = result.thresholds

    left, right, top, bottom = 60, 20, 40, 110
    col = 36
    width = width or left + right + col * len(order)
    plot_w = width - left - right
    col = plot_w / max(len(order), 1)
    plot_h = height - top - bottom
    extreme = max([abs(x) for xs in per_var.values() for x in xs] + [thr.strong * 1.2])
    limit = _nice_limit(extreme * 1.05)

    def y(val):
        return top + plot_h * (limit - val) / (2 * limit)

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height}" viewBox="0 0 {width:.0f} {height}" font-family="sans-serif" '
        'font-size="11">',
        f'<rect x="0" y="0" width="{width:.0f}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')

    for i, v in enumerate(order):
        x0 = left + i * col
        out.append(f'<rect x="{x0:.2f}" y="{top}" width="{col:.2f}" height="{plot_h}" '
                   f'fill="{BAND_FILL[bands[v]]}" stroke="none"/>')

    for t in _ticks(limit):
        out.append(f'<line x1="{left - 4}" y1="{y(t):.2f}" x2="{left}" y2="{y(t):.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{y(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<line x1="{left}" y1="{y(0):.2f}" x2="{left + plot_w:.2f}" y2="{y(0):.2f}" '
               'stroke="#888" stroke-width="0.8"/>')
    for level, dash, cls in ((thr.moderate, "2,3", "moderate"), (thr.strong, "6,4", "strong")):
        for s in (1, -1):
            out.append(f'<line class="threshold-{cls}" x1="{left}" y1="{y(s * level):.2f}" '
                       f'x2="{left + plot_w:.2f}" y2="{y(s * level):.2f}" stroke="black" '
                       f'stroke-dasharray="{dash}"/>')

    for i, v in enumerate(order):
        st = box_stats(per_var[v])
        cx = left + (i + 0.5) * col
        half = col * 0.3
        out.append(f'<g class="box" data-variable="{escape(v)}">')
        out.append(f'<line x1="{cx:.2f}" y1="{y(st["whisker_high"]):.2f}" x2="{cx:.2f}" '
                   f'y2="{y(st["q3"]):.2f}" stroke="black"/>')
        out.append(f'<line x1="{cx:.2f}" y1="{y(st["q1"]):.2f}" x2="{cx:.2f}" '
                   f'y2="{y(st["whisker_low"]):.2f}" stroke="black"/>')
        for w in ("whisker_high", "whisker_low"):
            out.append(f'<line x1="{cx - half / 2:.2f}" y1="{y(st[w]):.2f}" '
                       f'x2="{cx + half / 2:.2f}" y2="{y(st[w]):.2f}" stroke="black"/>')
        top_q = y(st["q3"])
        out.append(f'<rect x="{cx - half:.2f}" y="{top_q:.2f}" width="{2 * half:.2f}" '
                   f'height="{max(y(st["q1"]) - top_q, 0.5):.2f}" fill="white" stroke="black"/>')
        out.append(f'<line x1="{cx - half:.2f}" y1="{y(st["median"]):.2f}" '
                   f'x2="{cx + half:.2f}" y2="{y(st["median"]):.2f}" stroke="black" '
                   'stroke-width="2.5"/>')
        for o in st["outliers"]:
            out.append(f'<circle cx="{cx:.2f}" cy="{y(o):.2f}" r="2" fill="none" stroke="black"/>')
        out.append(f'<circle class="mean" cx="{cx:.2f}" cy="{y(st["mean"]):.2f}" r="3.5" '
                   'fill="#888" stroke="black" stroke-width="0.5"/>')
        out.append("</g>")
        ly = top + plot_h + 8
        out.append(f'<text x="{cx:.2f}" y="{ly}" text-anchor="end" '
                   f'transform="rotate(-60 {cx:.2f} {ly})">{escape(v)}</text>')

    out.append(f'<rect x="{left}" y="{top}" width="{plot_w:.2f}" height="{plot_h}" '
               'fill="none" stroke="black"/>')
    label = "importance coefficient" + (" (adjusted)" if result.adjust else "")
    out.append(f'<text x="14" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + plot_h / 2:.1f})">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
