import json
import subprocess
import sys

import pytest

from fersml.cli import main
from fersml.stats import SIMULATED_ROWS


@pytest.fixture
def sample_path(tmp_path, sample_xml):
    path = tmp_path / "sample.xml"
    path.write_bytes(sample_xml)
    return str(path)


def _lines(path, values):
    path.write_text("".join(f"{v}\n" for v in values))
    return str(path)


class TestValidate:
    def test_sample_ok(self, sample_path, capsys):
        assert main(["validate", sample_path]) == 0
        assert "OK" in capsys.readouterr().out

    def test_bundled_sample(self):
        assert main(["validate", "@sample"]) == 0

    def test_facet_violation(self, tmp_path, sample_xml, capsys):
        bad = tmp_path / "bad.xml"
        bad.write_bytes(sample_xml.replace(b'player_id="1" squad_number="9"', b'player_id="12" squad_number="9"'))
        assert main(["validate", str(bad)]) == 1
        assert "facet_violation" in capsys.readouterr().out

    def test_missing_path(self, tmp_path):
        assert main(["validate", str(tmp_path / "nope.xml")]) == 2


class TestMatch:
    def test_seeded_match(self, sample_path, tmp_path, capsys):
        out = tmp_path / "run"
        args = ["match", sample_path, sample_path, "--seed", "42", "--ticks", "3000", "--out", str(out)]
        assert main(args) == 0
        first = capsys.readouterr().out
        events = (out / "events.jsonl").read_bytes()
        trace = (out / "trace.csv").read_bytes()
        assert main(args) == 0
        assert capsys.readouterr().out == first
        assert (out / "events.jsonl").read_bytes() == events
        assert (out / "trace.csv").read_bytes() == trace
        assert len(trace.splitlines()) == 3001

    def test_zero_ticks(self, sample_path, tmp_path, capsys):
        assert main(["match", sample_path, sample_path, "--ticks", "0", "--seed", "1", "--out", str(tmp_path)]) == 0
        assert capsys.readouterr().out.strip().splitlines()[-1] == "0:0"

    def test_heatmap_renders(self, sample_path, tmp_path):
        assert main(["match", sample_path, sample_path, "--ticks", "200", "--seed", "3",
                     "--render", "heatmap", "--out", str(tmp_path)]) == 0
        for name in ("home.ppm", "away.ppm", "sum.ppm"):
            assert (tmp_path / name).read_bytes().startswith(b"P6")

    def test_derived_seed_printed(self, sample_path, tmp_path, capsys):
        assert main(["match", sample_path, sample_path, "--ticks", "10", "--out", str(tmp_path)]) == 0
        assert capsys.readouterr().out.startswith("seed: ")

    def test_invalid_input(self, tmp_path, sample_path):
        bad = tmp_path / "bad.xml"
        bad.write_text("<fersml>")
        assert main(["match", str(bad), sample_path, "--out", str(tmp_path)]) == 1

    def test_render_field_from_trace(self, sample_path, tmp_path):
        run = tmp_path / "run"
        main(["match", sample_path, sample_path, "--ticks", "100", "--seed", "1", "--out", str(run)])
        assert main(["render-field", str(run / "trace.csv"), "--render", "vectors", "--out", str(run)]) == 0
        assert (run / "sum.csv").read_text().startswith("x,y,vx,vy")


class TestWorldCup:
    def test_totals_and_summary(self, sample_path, tmp_path):
        teams = [sample_path] * 8
        args = ["worldcup", *teams, "--count", "2", "--ticks", "600", "--seed", "4", "--out", str(tmp_path)]
        assert main(args) == 0
        totals = (tmp_path / "totals.txt").read_text().split()
        assert len(totals) == 2
        summary = json.loads((tmp_path / "worldcup.json").read_text())
        assert summary["totals"] == [int(t) for t in totals]
        assert summary["sample_stats"]["n"] == 2

    def test_count_one_reproducible(self, sample_path, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["worldcup", *[sample_path] * 8, "--count", "1", "--ticks", "600",
                         "--seed", "8", "--out", str(out)]) == 0
            outs.append(((out / "totals.txt").read_bytes(), (out / "worldcup.json").read_bytes()))
        assert outs[0] == outs[1]

    def test_seven_teams(self, sample_path, tmp_path):
        assert main(["worldcup", *[sample_path] * 7, "--out", str(tmp_path)]) == 2

    def test_setting_file(self, sample_path, tmp_path):
        setting = tmp_path / "setting.json"
        setting.write_text(json.dumps({"skills": {"quickness": 20}}))
        assert main(["worldcup", *[sample_path] * 8, "--count", "1", "--ticks", "300", "--seed", "1",
                     "--setting", str(setting), "--out", str(tmp_path)]) == 0


class TestCompare:
    def test_table1_vs_row2(self, tmp_path):
        row2 = _lines(tmp_path / "row2.txt", SIMULATED_ROWS[1])
        assert main(["compare", "@table1", row2]) == 0

    def test_bundled_tokens(self):
        assert main(["compare", "@table1", "@table2:8"]) == 0

    def test_self(self, tmp_path, capsys):
        a = _lines(tmp_path / "a.txt", [27, 48, 35, 31, 34, 30, 33, 27, 22, 29])
        assert main(["compare", a, a]) == 0
        assert "z=+0.0000" in capsys.readouterr().out

    def test_separated(self, tmp_path):
        a = _lines(tmp_path / "a.txt", range(1, 11))
        b = _lines(tmp_path / "b.txt", range(100, 110))
        assert main(["compare", a, b]) == 3

    def test_short_file(self, tmp_path):
        a = _lines(tmp_path / "a.txt", [1])
        assert main(["compare", a, a]) == 2

    def test_bad_number(self, tmp_path):
        a = tmp_path / "a.txt"
        a.write_text("1\nx\n")
        assert main(["compare", str(a), str(a)]) == 2

    def test_alpha_range(self):
        assert main(["compare", "@table1", "@table1", "--alpha", "1.5"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fersml", "validate", "@sample"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "OK" in proc.stdout


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
