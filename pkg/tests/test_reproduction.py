"""Analytic table and curve tests."""

import csv
import io

import pytest

from src.core.errors import InfeasibleTargetError, UsageError
from src.evals.reproduction import (
    default_distortion_grid,
    make_curve,
    make_table,
    rate_reduction,
    write_curve_csv,
    write_table_csv,
)
from tests.reference_table import SUBOPTIMAL_RATES, TABLE_DISTORTION_DECIMALS, TABLE_ROWS

BLOCKS = [2, 3, 4, 5]


class TestMakeTable:
    """Test the performance table."""

    @pytest.fixture(scope="class")
    def rows(self):
        return make_table(
            [row.sqnr_db for row in TABLE_ROWS],
            BLOCKS,
            distortion_decimals=TABLE_DISTORTION_DECIMALS,
        )

    def test_reference_values(self, rows):
        assert len(rows) == len(TABLE_ROWS)
        for row, expected in zip(rows, TABLE_ROWS):
            assert row.sqnr_db == expected.sqnr_db
            assert row.t1 == pytest.approx(expected.t1, abs=5e-4)
            assert row.distortion == pytest.approx(expected.distortion, abs=5e-5)
            assert row.p1 + row.p2 == pytest.approx(1.0, abs=1e-12)
            assert row.p1 == pytest.approx(expected.p1, abs=5e-4)
            assert row.p2 == pytest.approx(expected.p2, abs=5e-4)
            assert row.entropy == pytest.approx(expected.entropy, abs=5e-4)
            for m in BLOCKS:
                if (expected.sqnr_db, m) in SUBOPTIMAL_RATES:
                    assert 0 < expected.rates[m] - row.rates[m] < 5e-3
                else:
                    assert row.rates[m] == pytest.approx(expected.rates[m], abs=1.5e-3)

    def test_exact_targets(self):
        """Without truncation each row sits exactly on its SQNR target."""
        rows = make_table([row.sqnr_db for row in TABLE_ROWS[:-1]], [2])
        for row in rows:
            assert row.distortion == pytest.approx(10 ** (-row.sqnr_db / 10), abs=1e-10)

    def test_truncated_distortion(self):
        (row,) = make_table([2.0], [2], distortion_decimals=4)
        assert row.distortion == pytest.approx(0.6309, abs=1e-10)
        assert row.t1 == pytest.approx(1.1876, abs=1e-4)

    def test_truncation_keeps_optimum_row(self):
        (row,) = make_table([3.0], [2], distortion_decimals=4)
        assert row.t1 == 0.0

    def test_truncation_still_rejects_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            make_table([3.5], [2], distortion_decimals=4)

    def test_invalid_decimals(self):
        with pytest.raises(UsageError):
            make_table([2.0], [2], distortion_decimals=0)

    def test_three_db_row_is_symmetric(self, rows):
        last = rows[-1]
        assert last.t1 == 0.0
        assert last.distortion == 0.5
        assert all(last.rates[m] == 1.0 for m in BLOCKS)

    def test_larger_blocks_help_below_optimum(self, rows):
        for row in rows:
            if row.sqnr_db <= 2.8:
                assert row.rates[3] <= row.rates[2]

    def test_pair_code_wins_near_optimum(self, rows):
        """Near 2.9 dB the three-symbol code is slightly worse than pairs."""
        row = next(r for r in rows if r.sqnr_db == 2.9)
        assert row.rates[3] > row.rates[2]

    def test_optimum_target(self):
        (row,) = make_table([3.0103], [2])
        assert row.t1 == 0.0
        assert row.entropy == pytest.approx(1.0, abs=1e-12)
        assert row.rates[2] == 1.0

    def test_exact_distortion(self):
        (row,) = make_table([2.45], [2])
        assert row.distortion == pytest.approx(10 ** -0.245, abs=1e-9)

    def test_snapping_disabled(self):
        (row,) = make_table([3.0], [2], snap_db=0.0)
        assert row.t1 > 0.1
        assert row.distortion == pytest.approx(10 ** -0.3, abs=1e-9)

    def test_outside_band(self):
        rows = make_table([1.0, 1.5], [2])
        assert rows[0].t1 > rows[1].t1 > 1.1876

    def test_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            make_table([2.0, 3.5], [2])


class TestMakeCurve:
    """Test the rate/distortion curve."""

    def test_optimum_point(self):
        (point,) = make_curve([0.5], [2, 3])
        assert point.entropy == pytest.approx(1.0, abs=1e-12)
        assert point.rates == {2: 1.0, 3: 1.0}

    def test_low_rate_point(self):
        (point,) = make_curve([0.6309], [2])
        assert point.entropy == pytest.approx(0.4471, abs=3e-4)

    def test_default_grid(self):
        grid = default_distortion_grid()
        assert len(grid) == 101
        assert grid[0] == 0.5
        assert grid[-1] == pytest.approx(0.631)

    def test_rates_bounded_by_entropy(self):
        for point in make_curve(default_distortion_grid(), [2, 3]):
            for m, rate in point.rates.items():
                assert point.entropy - 1e-12 <= rate < point.entropy + 1 / m

    def test_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            make_curve([0.4], [2])


class TestRateReduction:
    """Test the SQNR/rate trade-off."""

    def test_mid_band(self):
        tradeoff = rate_reduction(2.5, 3)
        assert tradeoff.sqnr_loss_db == pytest.approx(0.5103, abs=1e-3)
        assert tradeoff.rate_reduction >= 0.34
        assert tradeoff.rate_per_symbol + tradeoff.rate_reduction == pytest.approx(1.0)

    def test_optimum_saves_nothing(self):
        tradeoff = rate_reduction(3.0103, 4)
        assert tradeoff.rate_reduction == pytest.approx(0.0, abs=1e-12)


class TestCsv:
    """Test CSV writers."""

    def test_table_csv(self):
        out = io.StringIO()
        write_table_csv(make_table([2.0, 3.0], [3, 2]), [3, 2], out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "SQNR,D,t1,p1,p2,H,R(M=2),R(M=3)"
        assert lines[1].startswith("2.000000,0.630957,1.18")
        assert lines[2] == "3.000000,0.500000,0.000000,0.500000,0.500000,1.000000,1.000000,1.000000"

    def test_curve_csv(self):
        out = io.StringIO()
        write_curve_csv(make_curve([0.5, 0.55, 0.6], [2]), [2], out)
        records = list(csv.reader(io.StringIO(out.getvalue())))
        assert records[0] == ["D", "H", "R(M=2)"]
        assert len(records) == 4
        assert records[1] == ["0.500000", "1.000000", "1.000000"]
        assert all(len(r[0].split(".")[1]) == 6 for r in records[1:])
