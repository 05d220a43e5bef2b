"""Renderer and CLI tests, including the 4gt12-v1_89 chart the package
exists for.  The timeline CSV for that chart is produced by the installed
`inquirc` CLI — the analyzer's public interface — not by importing it."""

import pathlib
import shutil
import subprocess
import xml.etree.ElementTree as ET

import pytest

from plots.cli import main
from plots.render import SchemaError, Series, _series, read_timeline, render_text

ROOT = pathlib.Path(__file__).resolve().parents[2]

TINY = """time_ns,processor,remaining_ops
0,0,2
0,1,2
30,0,1
30,1,2
60,0,1
60,1,1
90,0,0
90,1,1
120,0,0
120,1,0
"""


def series_count(svg: str) -> int:
    return svg.count('class="series"')


# ---------------------------------------------------------------------------
# parsing and series construction
# ---------------------------------------------------------------------------

def test_read_timeline_accepts_analyzer_schema():
    rows = read_timeline(TINY)
    assert rows[0] == (0.0, 0, 2)
    assert rows[-1] == (120.0, 1, 0)
    assert len(rows) == 10


def test_series_keep_changes_and_final_timestamp():
    p0, p1 = _series(read_timeline(TINY))
    assert p0 == Series(0, ((0.0, 2), (0.03, 1), (0.09, 0), (0.12, 0)))
    assert p1 == Series(1, ((0.0, 2), (0.06, 1), (0.12, 0)))


@pytest.mark.parametrize("text, fragment", [
    ("time,processor,remaining_ops\n0,0,1\n", "expected header"),
    ("time_ns,processor,remaining_ops\n0,0\n", "3 fields"),
    ("time_ns,processor,remaining_ops\n0,1.5,1\n", "line 2"),
    ("time_ns,processor,remaining_ops\nabc,0,1\n", "line 2"),
    ("time_ns,processor,remaining_ops\n0,0,-1\n", "negative"),
    ("time_ns,processor,remaining_ops\n50,0,1\n20,0,0\n", "decreases"),
])
def test_malformed_csv_rejected(text, fragment):
    with pytest.raises(SchemaError, match=fragment):
        read_timeline(text)


def test_empty_input_needs_allow_empty():
    with pytest.raises(SchemaError, match="no data rows"):
        render_text("")
    with pytest.raises(SchemaError, match="no data rows"):
        render_text("time_ns,processor,remaining_ops\n")
    svg = render_text("", allow_empty=True)
    assert series_count(svg) == 0
    ET.fromstring(svg)      # still a complete, well-formed chart


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def test_two_processor_chart_shape():
    svg = render_text(TINY)
    ET.fromstring(svg)
    assert series_count(svg) == 2
    assert 'data-processor="0"' in svg and 'data-processor="1"' in svg
    assert "processor 0" in svg and "processor 1" in svg
    assert "time (µs)" in svg and "remaining operations" in svg


def test_procs_filter_and_unknown_processor():
    svg = render_text(TINY, procs=[1])
    assert series_count(svg) == 1
    assert 'data-processor="1"' in svg and 'data-processor="0"' not in svg
    assert "processor 0" not in svg
    with pytest.raises(SchemaError, match="not in timeline: 5"):
        render_text(TINY, procs=[0, 5])


def test_title_is_optional_and_escaped():
    plain = render_text(TINY)
    titled = render_text(TINY, title="a<b&c")
    assert "a&lt;b&amp;c" in titled
    assert plain != titled
    assert render_text(TINY, title=None) == plain


def test_render_is_pure():
    assert render_text(TINY, title="t") == render_text(TINY, title="t")
    assert render_text(TINY, procs=[0]) == render_text(TINY, procs=[0])


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_renders_and_is_byte_identical(tmp_path):
    src = tmp_path / "t.csv"
    src.write_text(TINY)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert main([str(src), "-o", str(a), "--title", "tiny"]) == 0
    assert main([str(src), "-o", str(b), "--title", "tiny"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert series_count(a.read_text()) == 2


def test_cli_errors(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main([str(missing), "-o", str(tmp_path / "o.svg")]) == 1
    assert "error:" in capsys.readouterr().err

    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    assert main([str(bad), "-o", str(tmp_path / "o.svg")]) == 1
    assert "expected header" in capsys.readouterr().err

    with pytest.raises(SystemExit) as exc:
        main([str(bad)])                       # -o is required
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([str(bad), "-o", "x.svg", "--procs", "0,zz"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# the chart this package exists for
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def timeline_4gt12(tmp_path_factory) -> pathlib.Path:
    inquirc = shutil.which("inquirc")
    assert inquirc, "inquirc must be installed (pip install -e ..)"
    out = tmp_path_factory.mktemp("data") / "4gt12_timeline.csv"
    subprocess.run(
        [inquirc, "analyze", str(ROOT / "bench" / "4gt12-v1_89.qasm"),
         "--arch", "linear:8x2,2", "--out", str(out)],
        check=True, stdout=subprocess.DEVNULL)
    return out


def test_4gt12_has_eight_series_and_identical_rerender(timeline_4gt12, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert main([str(timeline_4gt12), "-o", str(a)]) == 0
    assert main([str(timeline_4gt12), "-o", str(b)]) == 0
    svg = a.read_text()
    ET.fromstring(svg)
    assert series_count(svg) == 8
    for p in range(8):
        assert f'data-processor="{p}"' in svg
        assert f"processor {p}" in svg
    assert a.read_bytes() == b.read_bytes()
