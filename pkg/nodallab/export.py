"""CSV, JSON and SVG writers for experiment artifacts."""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .nodal import NodalCurveSet

_LOGGER = logging.getLogger(__name__)

SVG_SIZE = 480
_MARGIN = 40
_PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """RFC 4180 text: CRLF line ends, fields quoted only when needed."""
    buffer = io.StringIO(newline='')
    writer = csv.writer(buffer, lineterminator='\r\n', quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        handle.write(csv_text(header, rows))
    _LOGGER.debug("Wrote %s", path)
    return path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return value


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + '\n'


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json_text(obj), encoding='utf-8')
    _LOGGER.debug("Wrote %s", path)
    return path


def write_svg(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    _LOGGER.debug("Wrote %s", path)
    return path


# --- SVG ---


def _document(body: str, title: str) -> str:
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">\n'
        f'<title>{_escape(title)}</title>\n'
        f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>\n'
        f'{body}</svg>\n'
    )


def _escape(text: str) -> str:
    return text.replace('&', '&amp;').replace('<', '&lt;').replace('>', '&gt;')


class _Axes:
    """Maps data coordinates into the plotting square."""

    def __init__(self, xlim: Tuple[float, float], ylim: Tuple[float, float]):
        self.xlim = xlim if xlim[1] > xlim[0] else (xlim[0] - 0.5, xlim[0] + 0.5)
        self.ylim = ylim if ylim[1] > ylim[0] else (ylim[0] - 0.5, ylim[0] + 0.5)
        self.span = SVG_SIZE - 2 * _MARGIN

    def x(self, value):
        share = (value - self.xlim[0]) / (self.xlim[1] - self.xlim[0])
        return _MARGIN + share * self.span

    def y(self, value):
        share = (value - self.ylim[0]) / (self.ylim[1] - self.ylim[0])
        return SVG_SIZE - _MARGIN - share * self.span

    def frame(self, xlabel: str, ylabel: str) -> str:
        left, right = _MARGIN, SVG_SIZE - _MARGIN
        top, bottom = _MARGIN, SVG_SIZE - _MARGIN
        parts = [
            f'<rect x="{left}" y="{top}" '
            f'width="{right - left}" height="{bottom - top}" '
            'fill="none" stroke="black"/>',
        ]
        for value, anchor in ((self.xlim[0], 'start'), (self.xlim[1], 'end')):
            parts.append(
                f'<text x="{self.x(value):.2f}" y="{bottom + 14}" font-size="10" '
                f'text-anchor="{anchor}">{value:.4g}</text>'
            )
        for value, shift in ((self.ylim[0], 0), (self.ylim[1], 8)):
            parts.append(
                f'<text x="{left - 4}" y="{self.y(value) + shift:.2f}" font-size="10" '
                f'text-anchor="end">{value:.4g}</text>'
            )
        parts.append(
            f'<text x="{SVG_SIZE / 2:.0f}" y="{SVG_SIZE - 8}" font-size="12" '
            f'text-anchor="middle">{_escape(xlabel)}</text>'
        )
        parts.append(
            f'<text x="12" y="{SVG_SIZE / 2:.0f}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 12 {SVG_SIZE / 2:.0f})">{_escape(ylabel)}</text>'
        )
        return '\n'.join(parts) + '\n'


def _path(axes: _Axes, xs, ys) -> str:
    points = ' '.join(
        f"{'M' if index == 0 else 'L'}{axes.x(x):.2f},{axes.y(y):.2f}"
        for index, (x, y) in enumerate(zip(xs, ys))
    )
    return points


def _chart_pieces(line: np.ndarray, periods):
    """Split a polyline where it jumps across a periodic seam."""
    pieces = [[line[0]]]
    for previous, current in zip(line[:-1], line[1:]):
        jump = any(
            period and abs(current[axis] - previous[axis]) > 0.5 * period
            for axis, period in enumerate(periods)
        )
        if jump:
            pieces.append([])
        pieces[-1].append(current)
    return [np.array(piece) for piece in pieces if len(piece) > 1]


_TWO_PI = 2 * math.pi
# kind -> (x range, y range, periods, axis labels)
_CHARTS = {
    'torus': ((0.0, 1.0), (0.0, 1.0), (1.0, 1.0), ('x1', 'x2')),
    'sphere': ((0.0, math.pi), (0.0, _TWO_PI), (None, _TWO_PI), ('phi', 'theta')),
    'disc': ((0.0, 1.0), (0.0, _TWO_PI), (None, _TWO_PI), ('r', 'theta')),
}


def chart_window(surface):
    """Plot ranges and axis labels of a surface chart."""
    xlim, ylim, _, labels = _CHARTS[surface.kind]
    return xlim, ylim, labels


def curves_svg(curves: NodalCurveSet, title: str = 'nodal set') -> str:
    """Chart-projection drawing of a nodal curve set."""
    xlim, ylim, periods, labels = _CHARTS[curves.surface.kind]
    axes = _Axes(xlim, ylim)
    body = [axes.frame(*labels)]
    for line in curves.polylines:
        for piece in _chart_pieces(line, periods):
            body.append(
                f'<path d="{_path(axes, piece[:, 0], piece[:, 1])}" fill="none" '
                'stroke="black" stroke-width="1"/>\n'
            )
    return _document(''.join(body), title)


def lines_svg(
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    xlabel: str,
    ylabel: str,
    title: str = '',
    loglog: bool = False,
) -> str:
    """Line plot of (label, xs, ys) series, optionally on log-log axes."""
    prepared = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if loglog:
            keep = (xs > 0) & (ys > 0)
            xs, ys = np.log10(xs[keep]), np.log10(ys[keep])
        prepared.append((label, xs, ys))
    every_x = np.concatenate([xs for _, xs, _ in prepared] or [np.zeros(1)])
    every_y = np.concatenate([ys for _, _, ys in prepared] or [np.zeros(1)])
    axes = _Axes(
        (float(np.min(every_x)), float(np.max(every_x))),
        (float(np.min(every_y)), float(np.max(every_y))),
    )
    prefix = 'log10 ' if loglog else ''
    body = [axes.frame(prefix + xlabel, prefix + ylabel)]
    for index, (label, xs, ys) in enumerate(prepared):
        if not xs.size:
            continue
        colour = _PALETTE[index % len(_PALETTE)]
        body.append(
            f'<path d="{_path(axes, xs, ys)}" fill="none" '
            f'stroke="{colour}" stroke-width="1.5"/>\n'
        )
        body.append(
            f'<text x="{_MARGIN + 6}" y="{_MARGIN + 14 * (index + 1)}" font-size="11" '
            f'fill="{colour}">{_escape(label)}</text>\n'
        )
    return _document(''.join(body), title or ylabel)


def heatmap_svg(
    values: np.ndarray,
    xlim: Tuple[float, float],
    ylim: Tuple[float, float],
    labels: Tuple[str, str] = ('t', 'tau'),
    title: str = '',
    vmax: Optional[float] = None,
) -> str:
    """Grid of cells coloured blue (negative) to red (positive).

    values[i, j] is drawn at x_i, y_j.
    """
    values = np.asarray(values, dtype=float)
    axes = _Axes(xlim, ylim)
    scale = vmax or float(np.max(np.abs(values[np.isfinite(values)]))) or 1.0
    nx, ny = values.shape
    width = axes.span / nx
    height = axes.span / ny
    body = []
    for i in range(nx):
        for j in range(ny):
            value = values[i, j]
            level = 0.0
            if np.isfinite(value):
                level = float(np.clip(value / scale, -1.0, 1.0))
            red = int(255 * min(1.0, 1.0 + level))
            blue = int(255 * min(1.0, 1.0 - level))
            green = int(255 * (1.0 - abs(level)))
            body.append(
                f'<rect x="{_MARGIN + i * width:.2f}" '
                f'y="{SVG_SIZE - _MARGIN - (j + 1) * height:.2f}" '
                f'width="{width:.2f}" height="{height:.2f}" '
                f'fill="rgb({red},{green},{blue})"/>\n'
            )
    body.append(axes.frame(*labels))
    return _document(''.join(body), title)
