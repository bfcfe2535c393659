"""Tests for the CSV, JSON and SVG writers."""

import json
import math

import numpy as np
import pytest

from nodallab.export import (
    csv_text,
    curves_svg,
    heatmap_svg,
    json_text,
    lines_svg,
    write_csv,
    write_json,
    write_svg,
)
from nodallab.factory import EigenFnFactory
from nodallab.grid import GridField
from nodallab.nodal import extract_nodal


def test_csv_uses_crlf_and_minimal_quoting():
    text = csv_text(['p', 'note'], [(4, 'plain'), ('inf', 'a, b')])
    assert text == 'p,note\r\n4,plain\r\ninf,"a, b"\r\n'


def test_write_csv_creates_parents(tmp_path):
    path = write_csv(tmp_path / 'deep' / 'table.csv', ['n'], [(1,), (2,)])
    assert path.read_bytes() == b'n\r\n1\r\n2\r\n'


@pytest.mark.parametrize(
    'value,expected',
    [
        (math.inf, 'inf'),
        (-math.inf, '-inf'),
        (math.nan, None),
        (np.float64(0.5), 0.5),
        (np.int64(3), 3),
        (np.bool_(True), True),
        (np.arange(3), [0, 1, 2]),
        ((1, 2), [1, 2]),
    ],
)
def test_json_values(value, expected):
    assert json.loads(json_text({'value': value}))['value'] == expected


def test_json_keys_are_sorted_strings():
    text = json_text({'b': 1, 'a': {2: 'two'}})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {'a': {'2': 'two'}, 'b': 1}
    assert text.endswith('\n')


def test_write_json_round_trips(tmp_path):
    path = write_json(tmp_path / 'out' / 'result.json', {'ok': True, 'gap': math.nan})
    assert json.loads(path.read_text(encoding='utf-8')) == {'gap': None, 'ok': True}


# ----------------------------------------------------------------------
# SVG
# ----------------------------------------------------------------------


def test_lines_svg_labels_and_series():
    text = lines_svg(
        [('L4', [1, 2, 3], [1.0, 1.5, 2.0]), ('Linf', [1, 2, 3], [2.0, 2.0, 2.0])],
        'lambda',
        'norm',
        title='a < b & c',
    )
    assert text.startswith('<svg xmlns="http://www.w3.org/2000/svg"')
    assert text.count('<path ') == 2
    assert '<title>a &lt; b &amp; c</title>' in text
    assert '>L4</text>' in text


def test_lines_svg_loglog_drops_non_positive_points():
    text = lines_svg([('s', [0, 1, 10], [1, 1, 10])], 'x', 'y', loglog=True)
    assert 'log10 x' in text
    assert text.count('<path ') == 1


def test_curves_svg_draws_every_nodal_line():
    fn = EigenFnFactory('torus', k=(1, 2))
    curves = extract_nodal(GridField.sample(fn, 32))
    text = curves_svg(curves, title='torus (1, 2)')
    assert curves.polylines
    assert 'stroke="black" stroke-width="1"' in text
    assert '>x1</text>' in text


def test_heatmap_svg_has_one_cell_per_value(tmp_path):
    values = np.array([[-1.0, 0.0], [1.0, math.nan]])
    text = heatmap_svg(values, (0.0, 1.0), (-0.1, 0.1), title='log|g|')
    assert text.count('<rect ') == 1 + 4 + 1
    assert 'fill="rgb(0,0,255)"' in text
    assert 'fill="rgb(255,0,0)"' in text
    path = write_svg(tmp_path / 'plot.svg', text)
    assert path.read_text(encoding='utf-8') == text
