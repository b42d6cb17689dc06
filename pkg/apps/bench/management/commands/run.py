from pathlib import Path

from django.core.management.base import CommandError

from apps.bench.cli import ElectionCommand, add_config_arguments, read_config, sibling, write_json
from apps.core.tracing import trace_phase
from apps.election.scenario import generate_scenario
from apps.tally.serializers import TallyResultSerializer


class Command(ElectionCommand):
    help = "Run an election end to end, persist its transcript and print the tally."

    def add_arguments(self, parser):
        add_config_arguments(parser)
        parser.add_argument("--out", default="transcript.jsonl", help="Transcript path")
        parser.add_argument("--report", help="Tally report path (default: beside the transcript)")

    def run(self, run_id, **options):
        config, plan = read_config(
            options["config"],
            seed=options["seed"],
            backend=options["backend"],
            canonical=options["canonical_counts"],
        )
        out = Path(options["out"])
        with trace_phase("run", run_id=run_id, backend=str(config.backend)):
            scenario = generate_scenario(
                plan["honest"],
                plan["duplicate"],
                plan["invalid"],
                plan["coerced"],
                config,
                n_bad_proof=plan["bad_proof"],
                n_stuffed=plan["stuffed"],
                path=out,
            )
            result = scenario.election.tally()

        report_path = write_json(
            options["report"] or sibling(out, "report.json"),
            {"tally": TallyResultSerializer(result).data, "expected": scenario.ground_truth()},
        )
        self.emit(
            {
                "backend": str(config.backend),
                "counts": result.counts,
                "board_length": result.board_length,
                "transcript": str(out),
                "report": str(report_path),
            }
        )
        if result.counts != scenario.expected:
            raise CommandError(
                f"Tally {result.counts} disagrees with the expected {scenario.expected}",
                returncode=1,
            )
