"""Small deterministic SVG charts, no drawing dependencies.

Output is a pure function of the inputs: fixed canvas, fixed palette, fixed
coordinate formatting. Enough for layer profiles and histograms, nothing
more.
"""

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MARGIN_L = 64
_MARGIN_R = 18
_MARGIN_T = 34
_MARGIN_B = 46


def _limits(values, pad_fraction=0.05):
    lo = float(min(values))
    hi = float(max(values))
    if lo == hi:
        pad = max(0.5, abs(lo) * 0.5)
    else:
        pad = (hi - lo) * pad_fraction
    return lo - pad, hi + pad


def _fmt(value):
    return "%.6g" % value


def _coord(value):
    return "%.2f" % value


def _panel(out, x0, y0, width, height, series, title, x_label, y_label):
    plot_x = x0 + _MARGIN_L
    plot_y = y0 + _MARGIN_T
    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    all_x = [v for _, xs, _ in series for v in xs]
    all_y = [v for _, _, ys in series for v in ys]
    x_lo, x_hi = _limits(all_x)
    y_lo, y_hi = _limits(all_y)

    def sx(v):
        return plot_x + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return plot_y + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    out.append(
        '<rect x="%s" y="%s" width="%s" height="%s" fill="white" stroke="#444444"/>'
        % (_coord(plot_x), _coord(plot_y), _coord(plot_w), _coord(plot_h))
    )
    out.append(
        '<text x="%s" y="%s" font-size="14" text-anchor="middle" font-family="sans-serif">%s</text>'
        % (_coord(x0 + width / 2), _coord(y0 + 20), title)
    )
    for i in range(5):
        frac = i / 4
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        gx = sx(xv)
        gy = sy(yv)
        out.append(
            '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#cccccc"/>'
            % (_coord(gx), _coord(plot_y), _coord(gx), _coord(plot_y + plot_h))
        )
        out.append(
            '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#cccccc"/>'
            % (_coord(plot_x), _coord(gy), _coord(plot_x + plot_w), _coord(gy))
        )
        out.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="middle" font-family="sans-serif">%s</text>'
            % (_coord(gx), _coord(plot_y + plot_h + 14), _fmt(xv))
        )
        out.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="end" font-family="sans-serif">%s</text>'
            % (_coord(plot_x - 4), _coord(gy + 3), _fmt(yv))
        )
    out.append(
        '<text x="%s" y="%s" font-size="12" text-anchor="middle" font-family="sans-serif">%s</text>'
        % (_coord(plot_x + plot_w / 2), _coord(y0 + height - 10), x_label)
    )
    out.append(
        '<text x="%s" y="%s" font-size="12" text-anchor="middle" font-family="sans-serif" '
        'transform="rotate(-90 %s %s)">%s</text>'
        % (
            _coord(x0 + 14),
            _coord(plot_y + plot_h / 2),
            _coord(x0 + 14),
            _coord(plot_y + plot_h / 2),
            y_label,
        )
    )
    for pos, (label, xs, ys) in enumerate(series):
        color = PALETTE[pos % len(PALETTE)]
        points = " ".join("%s,%s" % (_coord(sx(x)), _coord(sy(y))) for x, y in zip(xs, ys))
        out.append(
            '<polyline points="%s" fill="none" stroke="%s" stroke-width="1.5"/>' % (points, color)
        )
        for x, y in zip(xs, ys):
            out.append(
                '<circle cx="%s" cy="%s" r="2.5" fill="%s"/>' % (_coord(sx(x)), _coord(sy(y)), color)
            )
        ly = plot_y + 14 + 14 * pos
        lx = plot_x + plot_w - 8
        out.append(
            '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" stroke-width="2"/>'
            % (_coord(lx - 110), _coord(ly - 4), _coord(lx - 92), _coord(ly - 4), color)
        )
        out.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="start" font-family="sans-serif">%s</text>'
            % (_coord(lx - 88), _coord(ly), label)
        )


def _document(width, height, body):
    head = (
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (width, height, width, height)
    )
    return head + "\n" + "\n".join(body) + "\n</svg>\n"


def line_chart(series, title="", x_label="", y_label="", width=840, height=480) -> str:
    """One panel of line series. ``series`` is a list of (label, xs, ys)."""
    if not series:
        raise ValueError("need at least one series")
    body = ['<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (width, height)]
    _panel(body, 0, 0, width, height, series, title, x_label, y_label)
    return _document(width, height, body)


def two_panel_chart(
    top_series,
    bottom_series,
    top_title="",
    bottom_title="",
    x_label="",
    top_y_label="",
    bottom_y_label="",
    width=840,
    height=720,
) -> str:
    """Two stacked line panels sharing the canvas, e.g. dimension over layers
    above curvature over layers."""
    if not top_series or not bottom_series:
        raise ValueError("need at least one series per panel")
    half = height // 2
    body = ['<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (width, height)]
    _panel(body, 0, 0, width, half, top_series, top_title, x_label, top_y_label)
    _panel(body, 0, half, width, height - half, bottom_series, bottom_title, x_label, bottom_y_label)
    return _document(width, height, body)


def bar_chart(edges, counts, title="", x_label="", y_label="", width=840, height=480) -> str:
    """Histogram bars over contiguous bin edges."""
    edges = np.asarray(edges, dtype=np.float64)
    counts = np.asarray(counts)
    if edges.ndim != 1 or counts.ndim != 1 or edges.size != counts.size + 1:
        raise ValueError("edges must have one more entry than counts")
    if counts.size < 1:
        raise ValueError("need at least one bin")
    plot_x = _MARGIN_L
    plot_y = _MARGIN_T
    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    x_lo = float(edges[0])
    x_hi = float(edges[-1])
    if x_lo == x_hi:
        x_hi = x_lo + 1.0
    y_hi = max(1.0, float(counts.max()) * 1.05)

    def sx(v):
        return plot_x + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return plot_y + plot_h - v / y_hi * plot_h

    body = ['<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (width, height)]
    body.append(
        '<rect x="%s" y="%s" width="%s" height="%s" fill="white" stroke="#444444"/>'
        % (_coord(plot_x), _coord(plot_y), _coord(plot_w), _coord(plot_h))
    )
    body.append(
        '<text x="%s" y="%s" font-size="14" text-anchor="middle" font-family="sans-serif">%s</text>'
        % (_coord(width / 2), "20", title)
    )
    for i in range(5):
        frac = i / 4
        xv = x_lo + frac * (x_hi - x_lo)
        yv = frac * y_hi
        body.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="middle" font-family="sans-serif">%s</text>'
            % (_coord(sx(xv)), _coord(plot_y + plot_h + 14), _fmt(xv))
        )
        body.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="end" font-family="sans-serif">%s</text>'
            % (_coord(plot_x - 4), _coord(sy(yv) + 3), _fmt(yv))
        )
    for i in range(counts.size):
        x_left = sx(float(edges[i]))
        x_right = sx(float(edges[i + 1]))
        y_top = sy(float(counts[i]))
        body.append(
            '<rect x="%s" y="%s" width="%s" height="%s" fill="%s" stroke="#333333" stroke-width="0.5"/>'
            % (
                _coord(x_left),
                _coord(y_top),
                _coord(max(x_right - x_left, 0.0)),
                _coord(plot_y + plot_h - y_top),
                PALETTE[0],
            )
        )
    body.append(
        '<text x="%s" y="%s" font-size="12" text-anchor="middle" font-family="sans-serif">%s</text>'
        % (_coord(plot_x + plot_w / 2), _coord(height - 10), x_label)
    )
    body.append(
        '<text x="%s" y="%s" font-size="12" text-anchor="middle" font-family="sans-serif" '
        'transform="rotate(-90 14 %s)">%s</text>'
        % ("14", _coord(plot_y + plot_h / 2), _coord(plot_y + plot_h / 2), y_label)
    )
    return _document(width, height, body)
