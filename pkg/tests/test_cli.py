"""Command-line interface tests."""

import csv
import io
import json
import logging

import numpy as np
import pytest

from src.cli import main, parse_grid
from src.evals.simulation import sample_laplacian


def run(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


class TestParseGrid:
    """Test grid parsing."""

    def test_inclusive_stop(self):
        grid = parse_grid("2.0:0.1:3.0")
        assert len(grid) == 11
        assert grid[0] == 2.0
        assert grid[5] == 2.5
        assert grid[-1] == 3.0

    def test_single_point(self):
        assert parse_grid("3.0103:1:3.0103") == [3.0103]

    def test_never_passes_stop(self):
        assert parse_grid("2.0:0.4:3.0") == [2.0, 2.4, 2.8]
        assert parse_grid("2.0:0.3:2.9") == [2.0, 2.3, 2.6, 2.9]

    def test_distortion_grid_lands_on_stop(self):
        grid = parse_grid("0.5:0.0131:0.631")
        assert len(grid) == 11
        assert grid[-1] == 0.631

    @pytest.mark.parametrize("text", ["2.0:0.1", "a:b:c", "3:0.1:2", "2:0:3", "2:nan:3"])
    def test_invalid(self, text):
        with pytest.raises(Exception):
            parse_grid(text)


class TestDesignCommand:
    """Test `lapq design`."""

    def test_sqnr_json(self, capsys):
        status, out, _ = run(capsys, "design", "--sqnr", "2.0", "--format", "json")
        assert status == 0
        design = json.loads(out)
        assert design["t1"] == pytest.approx(1.1876, abs=5e-4)
        assert design["p1"] == pytest.approx(0.9067, abs=5e-4)

    def test_distortion_text(self, capsys):
        status, out, _ = run(capsys, "design", "--distortion", "0.5")
        assert status == 0
        fields = dict(line.split(None, 1) for line in out.splitlines())
        assert fields["t1"] == "0.000000"
        assert fields["y1"] == "-0.707107"

    def test_infeasible(self, capsys):
        status, out, err = run(capsys, "design", "--sqnr", "3.5")
        assert status == 2
        assert out == ""
        assert len(err.strip().splitlines()) == 1
        assert "3.0103" in err

    def test_verbose_logs_command(self, capsys):
        status, _, err = run(capsys, "--verbose", "design", "--sqnr", "2.5")
        logging.getLogger().setLevel(logging.WARNING)
        assert status == 0
        records = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
        finished = [r for r in records if r["message"] == "Command finished"]
        assert len(finished) == 1
        assert finished[0]["command"] == "design"
        assert finished[0]["status"] == 0

    def test_both_targets(self, capsys):
        status, _, err = run(capsys, "design", "--sqnr", "2.0", "--distortion", "0.6")
        assert status == 1
        assert err.startswith("error:")

    def test_missing_command(self, capsys):
        status, _, _ = run(capsys)
        assert status == 1


class TestTableCommand:
    """Test `lapq table`."""

    def test_reference_grid(self, capsys, tmp_path):
        out_path = tmp_path / "table.csv"
        status, _, _ = run(capsys, "table", "--grid", "2.0:0.1:3.0", "--blocks", "2,3,4,5",
                           "--out", str(out_path))
        assert status == 0
        records = list(csv.DictReader(out_path.open()))
        assert len(records) == 11
        assert float(records[0]["t1"]) == pytest.approx(1.1876, abs=5e-4)
        assert float(records[0]["R(M=5)"]) == pytest.approx(0.4612, abs=1.5e-3)
        assert float(records[-1]["t1"]) == 0.0

    def test_stdout_default_blocks(self, capsys):
        status, out, _ = run(capsys, "table", "--grid", "3.0103:1:3.0103")
        assert status == 0
        lines = out.splitlines()
        assert lines[0].endswith("R(M=2),R(M=3),R(M=4),R(M=5)")
        assert lines[1].split(",")[2] == "0.000000"

    def test_outside_band(self, capsys):
        status, out, _ = run(capsys, "table", "--grid", "1.0:0.5:1.5", "--blocks", "2")
        assert status == 0
        assert len(out.splitlines()) == 3

    def test_coarse_grid_stays_feasible(self, capsys):
        status, out, _ = run(capsys, "table", "--grid", "2.0:0.4:3.0", "--blocks", "2")
        assert status == 0
        records = list(csv.DictReader(io.StringIO(out)))
        assert [r["SQNR"] for r in records] == ["2.000000", "2.400000", "2.800000"]

    def test_truncated_distortion(self, capsys):
        status, out, _ = run(capsys, "table", "--grid", "2.1:0.8:2.9", "--blocks", "2",
                             "--distortion-decimals", "4")
        assert status == 0
        records = list(csv.DictReader(io.StringIO(out)))
        assert [r["D"] for r in records] == ["0.616500", "0.512800"]
        assert float(records[0]["t1"]) == pytest.approx(1.1096, abs=2e-4)
        assert float(records[1]["t1"]) == pytest.approx(0.3866, abs=2e-4)

    def test_block_size_out_of_range(self, capsys):
        status, _, _ = run(capsys, "table", "--blocks", "17")
        assert status == 2

    def test_bad_grid(self, capsys):
        status, _, _ = run(capsys, "table", "--grid", "2.0-3.0")
        assert status == 1


class TestCurveCommand:
    """Test `lapq curve`."""

    def test_rates_above_entropy(self, capsys):
        status, out, _ = run(capsys, "curve", "--dgrid", "0.5:0.0131:0.631", "--blocks", "2,3")
        assert status == 0
        records = list(csv.DictReader(io.StringIO(out)))
        assert len(records) == 11
        for record in records:
            assert float(record["R(M=2)"]) >= float(record["H"]) - 1e-6
            assert float(record["R(M=3)"]) >= float(record["H"]) - 1e-6

    def test_optimum_point(self, capsys):
        status, out, _ = run(capsys, "curve", "--dgrid", "0.5:0.1:0.5", "--blocks", "2")
        assert status == 0
        assert out.splitlines()[1] == "0.500000,1.000000,1.000000"

    def test_infeasible(self, capsys):
        status, _, err = run(capsys, "curve", "--dgrid", "0.4:0.05:0.45")
        assert status == 2
        assert err.startswith("error:")


class TestCodecCommands:
    """Test `lapq encode` and `lapq decode`."""

    def test_round_trip(self, capsys, tmp_path):
        samples = sample_laplacian(5, 10_001)
        raw = tmp_path / "x.f64"
        raw.write_bytes(samples.astype("<f8").tobytes())
        container = tmp_path / "x.lapq"
        restored = tmp_path / "y.f64"

        status, out, _ = run(capsys, "encode", "--in", str(raw), "--sqnr", "2.5", "--block", "3",
                             "--out", str(container), "--format", "json")
        assert status == 0
        summary = json.loads(out)
        assert summary["samples"] == 10_001
        assert container.read_bytes()[:4] == b"LAPQ"

        status, out, _ = run(capsys, "decode", "--in", str(container), "--out", str(restored),
                             "--format", "json")
        assert status == 0
        assert json.loads(out)["samples"] == 10_001
        values = np.frombuffer(restored.read_bytes(), dtype="<f8")
        assert values.shape == (10_001,)
        assert np.mean((values - samples) ** 2) == pytest.approx(summary["mse"], rel=1e-9)
        assert len(np.unique(values)) == 2

    def test_empirical_rate(self, capsys, tmp_path):
        raw = tmp_path / "x.f64"
        raw.write_bytes(sample_laplacian(8, 1_000_000).astype("<f8").tobytes())
        status, out, _ = run(capsys, "encode", "--in", str(raw), "--sqnr", "2.2", "--block", "3",
                             "--out", str(tmp_path / "x.lapq"), "--format", "json")
        assert status == 0
        assert json.loads(out)["bits_per_symbol"] == pytest.approx(0.5643, abs=5e-3)

    def test_wrong_magic(self, capsys, tmp_path):
        bogus = tmp_path / "bogus.lapq"
        bogus.write_bytes(b"NOPE" + bytes(40))
        status, _, err = run(capsys, "decode", "--in", str(bogus), "--out", str(tmp_path / "y"))
        assert status == 3
        assert "corrupt header" in err

    def test_missing_input(self, capsys, tmp_path):
        status, _, _ = run(capsys, "encode", "--in", str(tmp_path / "absent"), "--sqnr", "2.5",
                           "--block", "2", "--out", str(tmp_path / "x.lapq"))
        assert status == 3

    def test_ragged_raw_file(self, capsys, tmp_path):
        raw = tmp_path / "x.f64"
        raw.write_bytes(bytes(12))
        status, _, _ = run(capsys, "encode", "--in", str(raw), "--sqnr", "2.5", "--block", "2",
                           "--out", str(tmp_path / "x.lapq"))
        assert status == 3


class TestSimulateCommand:
    """Test `lapq simulate`."""

    def test_optimum_one_bit(self, capsys):
        status, out, _ = run(capsys, "simulate", "--sqnr", "3.0103", "--blocks", "2",
                             "--n", "1000", "--seed", "42")
        assert status == 0
        report = json.loads(out)
        assert report["empirical"]["bits_per_symbol"]["2"] == 1.0

    def test_deterministic(self, capsys):
        argv = ["simulate", "--sqnr", "2.4", "--blocks", "2,3", "--n", "20000", "--seed", "7"]
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first[0] == second[0] == 0
        assert first[1] == second[1]

    def test_grid(self, capsys, tmp_path):
        out_path = tmp_path / "sim.json"
        status, _, _ = run(capsys, "simulate", "--grid", "2.0:0.5:3.0", "--blocks", "2",
                           "--n", "20000", "--workers", "2", "--out", str(out_path))
        assert status == 0
        reports = json.loads(out_path.read_text())
        assert [r["sqnr_target_db"] for r in reports] == [2.0, 2.5, 3.0]

    def test_bad_seed(self, capsys):
        status, _, _ = run(capsys, "simulate", "--sqnr", "2.5", "--seed", "-1")
        assert status == 1
