"""
Tests for the complexity sweep.
"""
import io

import pytest

from apps.bench.bench import BenchRow, fit_slope, fit_slopes, run_bench, run_cell, write_csv
from apps.core.exceptions import ConfigurationError


class TestCells:
    """Exact counts for small all-honest boards."""

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_quadratic_formula(self, n):
        row = run_cell("quadratic", n, seed=0, shadow_rounds=2)

        assert row.roll == n
        assert row.pet_count == n * (n - 1) // 2 + n * n
        assert row.hash_eval_count == 0

    @pytest.mark.parametrize("backend", ["linear", "smith_weber"])
    def test_linear_formula(self, backend):
        row = run_cell(backend, 4, seed=0, shadow_rounds=2)

        assert row.hash_eval_count == 12
        assert row.pet_count == 0

    def test_empty_cell(self, backend):
        row = run_cell(backend, 0, seed=0, shadow_rounds=2)
        assert (row.pet_count, row.hash_eval_count, row.roll) == (0, 0, 0)

    def test_optimized_quadratic(self):
        full = run_cell("quadratic", 4, seed=0, shadow_rounds=2)
        fast = run_cell("quadratic", 4, seed=0, canonical=False, shadow_rounds=2)
        assert fast.pet_count < full.pet_count


class TestSweep:
    def test_rows_and_slopes(self):
        rows = run_bench([2, 4, 8], ["quadratic", "smith_weber"], shadow_rounds=2)

        assert [(row.backend, row.n) for row in rows] == [
            ("quadratic", 2),
            ("quadratic", 4),
            ("quadratic", 8),
            ("smith_weber", 2),
            ("smith_weber", 4),
            ("smith_weber", 8),
        ]
        slopes = fit_slopes(rows)
        assert slopes["smith_weber"]["hash_eval_count"] == pytest.approx(1.0)
        assert slopes["quadratic"]["pet_count"] > 1.8
        assert slopes["quadratic"]["hash_eval_count"] is None

    def test_repetitions_vary_the_seed(self):
        rows = run_bench([2], ["linear"], repetitions=2, seed=10, shadow_rounds=2)
        assert [row.seed for row in rows] == [10, 11]
        assert rows[0].hash_eval_count == rows[1].hash_eval_count == 6

    @pytest.mark.parametrize(
        "sizes, backends",
        [([4, 2], None), ([-1, 2], None), ([2], ["cubic"])],
    )
    def test_rejected(self, sizes, backends):
        with pytest.raises(ConfigurationError):
            run_bench(sizes, backends)

    @pytest.mark.slow
    def test_default_sweep_slopes(self):
        rows = run_bench([50, 100, 200, 400])
        slopes = fit_slopes(rows)

        assert slopes["quadratic"]["pet_count"] == pytest.approx(2.0, abs=0.1)
        assert slopes["linear"]["hash_eval_count"] == pytest.approx(1.0, abs=0.05)
        assert slopes["smith_weber"]["hash_eval_count"] == pytest.approx(1.0, abs=0.05)


class TestOutput:
    def test_csv_layout(self):
        rows = [BenchRow("linear", 2, 2, 0, 6, 1.23456, 0)]
        handle = io.StringIO()

        write_csv(rows, handle)

        assert handle.getvalue() == (
            "backend,n,roll,pet_count,hash_eval_count,wall_time_ms,seed\n"
            "linear,2,2,0,6,1.235,0\n"
        )

    def test_slope_needs_two_sizes(self):
        rows = [BenchRow("linear", 2, 2, 0, 6, 1.0, 0)]
        assert fit_slope(rows, "linear", "hash_eval_count") is None
