import argparse
import json
from pathlib import Path

from django.conf import settings

from apps.bench.bench import fit_slopes, run_bench, write_csv
from apps.bench.cli import ElectionCommand, parse_sizes
from apps.core.exceptions import ConfigurationError, PersistenceError
from apps.core.tracing import trace_phase


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError as exc:
        raise ConfigurationError("Seed must be an unsigned integer", seed=value) from exc
    if not 0 <= seed < 1 << 64:
        raise ConfigurationError("Seed must be an unsigned 64-bit integer", seed=value)
    return seed


class Command(ElectionCommand):
    help = (
        "Sweep ballot counts per backend, write one CSV row per cell and print "
        "the fitted log-log slopes of the operation counts."
    )

    def add_arguments(self, parser):
        defaults = settings.BENCH_DEFAULTS
        parser.add_argument(
            "--sizes",
            default=",".join(str(n) for n in defaults["sizes"]),
            help="Ascending comma-separated ballot counts",
        )
        parser.add_argument(
            "--backend",
            default=",".join(defaults["backends"]),
            help="Comma-separated backends",
        )
        parser.add_argument("--repetitions", type=int, default=defaults["repetitions"])
        parser.add_argument("--seed", default="0")
        parser.add_argument("--group-bits", type=int, default=defaults["group_bits"])
        parser.add_argument("--out", help="CSV path (default: stdout)")
        parser.add_argument(
            "--parallel", type=int, default=1, help="Worker processes across cells"
        )
        parser.add_argument(
            "--canonical-counts",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="Run every PET without early exit (default on)",
        )

    def run(self, run_id, **options):
        sizes = parse_sizes(options["sizes"])
        backends = [name.strip() for name in options["backend"].split(",") if name.strip()]
        if options["repetitions"] < 1:
            raise ConfigurationError("Repetitions must be at least 1")

        with trace_phase("bench", run_id=run_id, sizes=sizes, backends=backends):
            rows = run_bench(
                sizes,
                backends,
                options["repetitions"],
                _seed(options["seed"]),
                parallel=max(1, options["parallel"]),
                canonical=options["canonical_counts"],
                group_bits=options["group_bits"],
            )

        slopes = json.dumps({"slopes": fit_slopes(rows)}, indent=2, sort_keys=True)
        if options["out"]:
            path = Path(options["out"])
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                with path.open("w", encoding="utf-8", newline="") as handle:
                    write_csv(rows, handle)
            except OSError as exc:
                raise PersistenceError(path=str(path), reason=str(exc)) from exc
            self.stdout.write(slopes)
        else:
            write_csv(rows, self.stdout)
            self.stderr.write(slopes)
