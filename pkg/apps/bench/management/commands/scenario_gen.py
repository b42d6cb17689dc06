from pathlib import Path

from apps.bench.cli import ElectionCommand, add_config_arguments, read_config, sibling, write_json
from apps.election.scenario import generate_scenario


class Command(ElectionCommand):
    help = "Populate a board from a config's scenario block and write its ground-truth tally."

    def add_arguments(self, parser):
        add_config_arguments(parser)
        parser.add_argument("--out", default="scenario.jsonl", help="Board path")

    def run(self, run_id, **options):
        config, plan = read_config(
            options["config"],
            seed=options["seed"],
            backend=options["backend"],
            canonical=options["canonical_counts"],
        )
        out = Path(options["out"])
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
        truth = {
            "backend": str(config.backend),
            "roll": scenario.roll_size,
            "ballots": len(scenario.ledger),
            "ledger": [
                {
                    "board_index": record.board_index,
                    "label": record.label,
                    "choice": record.choice,
                }
                for record in scenario.ledger
            ],
            **scenario.ground_truth(),
        }
        truth_path = write_json(sibling(out, "truth.json"), truth)
        self.emit({"board": str(out), "truth": str(truth_path), "counts": scenario.expected})
