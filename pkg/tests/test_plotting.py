"""SVG rendering: determinism, empty input, malformed input."""
import pytest

from nomafl.plotting import emit_plot
from nomafl.sweep import CSV_COLUMNS, SweepFormatError

HEADER = ",".join(CSV_COLUMNS) + "\n"

SAMPLE = HEADER + "".join(
    f"bs_power_dbm,{v},{s},{e},1,3,0.4\n"
    for v, pack in ((25, 0), (30, 1), (35, 2))
    for s, e in (("NomaAigc", 0.8 - 0.1 * pack), ("FdmaAigc", 0.85 - 0.08 * pack),
                 ("NomaNoAigc", 0.9)))


def test_render_deterministic_bytes(tmp_path):
    csv = tmp_path / "rows.csv"
    csv.write_text(SAMPLE)
    out1, out2 = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_plot(str(csv), str(out1))
    emit_plot(str(csv), str(out2))
    data = out1.read_bytes()
    assert data == out2.read_bytes()
    assert data.lstrip().startswith(b"<?xml")
    for name in (b"NomaAigc", b"FdmaAigc", b"NomaNoAigc"):
        assert name in data      # legend text stays text
    assert b"bs_power_dbm" in data


def test_empty_but_headered_csv_renders_axes(tmp_path):
    csv = tmp_path / "rows.csv"
    csv.write_text(HEADER)
    out = tmp_path / "empty.svg"
    emit_plot(str(csv), str(out))
    data = out.read_bytes()
    assert b"<svg" in data
    assert b"sweep value" in data


def test_malformed_csv_raises_with_line(tmp_path):
    csv = tmp_path / "rows.csv"
    csv.write_text(HEADER + "p,1,NomaAigc,bad,1,2,0.1\n")
    with pytest.raises(SweepFormatError) as exc:
        emit_plot(str(csv), str(tmp_path / "x.svg"))
    assert exc.value.line == 2
