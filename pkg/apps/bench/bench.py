"""
Complexity sweep: operation counts and wall time per (backend, n).

Each cell tallies a scenario with n honest ballots from n registered voters,
so |L| = n. Counts are exact and deterministic; wall time is informative.
"""
import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

from django.conf import settings

import numpy as np

from apps.core.exceptions import ConfigurationError
from apps.election.models import Backend, ElectionConfig
from apps.election.scenario import generate_scenario

logger = logging.getLogger(__name__)

METRICS = ("pet_count", "hash_eval_count")


@dataclass(frozen=True)
class BenchRow:
    backend: str
    n: int
    roll: int
    pet_count: int
    hash_eval_count: int
    wall_time_ms: float
    seed: int

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_csv(self) -> list:
        row = list(astuple(self))
        row[5] = f"{self.wall_time_ms:.3f}"
        return row


def bench_config(backend: str, seed: int, canonical: bool = True, **overrides) -> ElectionConfig:
    defaults = settings.BENCH_DEFAULTS
    values = {
        "election_id": f"bench-{backend}",
        "seed": str(seed),
        "backend": backend,
        "canonical_counts": canonical,
        "group_bits": defaults["group_bits"],
        "talliers": defaults["talliers"],
        "threshold": defaults["threshold"],
        "mix_servers": defaults["mix_servers"],
        "shadow_rounds": defaults["shadow_rounds"],
    }
    values.update(overrides)
    return ElectionConfig.from_settings(**values)


def run_cell(backend: str, n: int, seed: int, canonical: bool = True, **overrides) -> BenchRow:
    """One (backend, n) measurement; only the tally is timed."""
    config = bench_config(backend, seed, canonical, **overrides)
    scenario = generate_scenario(n, 0, 0, 0, config)
    started = time.perf_counter()
    result = scenario.election.tally()
    elapsed = (time.perf_counter() - started) * 1000
    row = BenchRow(
        backend=str(backend),
        n=n,
        roll=scenario.roll_size,
        pet_count=result.counters.pet_count,
        hash_eval_count=result.counters.hash_eval_count,
        wall_time_ms=elapsed,
        seed=seed,
    )
    logger.info(
        f"Bench cell {backend} n={n} done ({elapsed:.2f}ms)",
        extra={"backend": str(backend), "n": n, "duration_ms": elapsed},
    )
    return row


def _run_cell(args) -> BenchRow:
    backend, n, seed, canonical, overrides = args
    return run_cell(backend, n, seed, canonical, **overrides)


def run_bench(
    sizes,
    backends=None,
    repetitions: int = 1,
    seed: int = 0,
    *,
    parallel: int = 1,
    canonical: bool = True,
    **overrides,
) -> list[BenchRow]:
    """
    Sweep every (backend, n, repetition) cell. ``parallel`` > 1 spreads
    whole cells over worker processes; rows keep the sequential order.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ConfigurationError("Benchmark sizes must be ascending", sizes=sizes)
    if any(n < 0 for n in sizes):
        raise ConfigurationError("Benchmark sizes must be non-negative", sizes=sizes)
    backends = list(backends or settings.BENCH_DEFAULTS["backends"])
    unknown = [backend for backend in backends if backend not in Backend.values]
    if unknown:
        raise ConfigurationError("Unknown tallying backend", backend=", ".join(unknown))

    cells = [
        (backend, n, seed + repetition, canonical, overrides)
        for backend in backends
        for n in sizes
        for repetition in range(repetitions)
    ]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_run_cell, cells))
    return [_run_cell(cell) for cell in cells]


def fit_slope(rows, backend: str, metric: str) -> float | None:
    """Least-squares slope of log(metric) against log(n); None without two sizes."""
    points = [
        (row.n, getattr(row, metric))
        for row in rows
        if row.backend == backend and row.n > 0 and getattr(row, metric) > 0
    ]
    if len({n for n, _ in points}) < 2:
        return None
    xs = np.log([n for n, _ in points])
    ys = np.log([value for _, value in points])
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def fit_slopes(rows) -> dict[str, dict[str, float | None]]:
    backends = sorted({row.backend for row in rows})
    return {
        backend: {metric: fit_slope(rows, backend, metric) for metric in METRICS}
        for backend in backends
    }


def write_csv(rows, handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(BenchRow.header())
    for row in rows:
        writer.writerow(row.as_csv())
