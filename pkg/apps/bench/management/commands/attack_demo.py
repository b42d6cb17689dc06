from apps.bench.cli import ElectionCommand, read_config
from apps.election.models import Backend
from apps.tally.attack import ProbeVerdict, run_attack_demo

NARRATIVE = {
    ProbeVerdict.REGISTERED: "the credential is on the roll",
    ProbeVerdict.NOT_REGISTERED: "the credential is not on the roll",
    ProbeVerdict.INCONCLUSIVE: "no related ballot pair is visible",
    ProbeVerdict.NOT_APPLICABLE: "the board publishes no blinded values to probe",
}


class Command(ElectionCommand):
    help = (
        "Let a coercer probe a real and a fake credential by casting (sigma, sigma^w) "
        "ballot pairs, then report what each backend's published evidence reveals."
    )

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Election config file (JSON)")
        parser.add_argument("--seed", help="Override the config seed")
        parser.add_argument(
            "--backend",
            help="Backend to attack (default: all three)",
            choices=Backend.values,
        )
        parser.add_argument("--voters", type=int, default=6)

    def run(self, run_id, **options):
        backends = [options["backend"]] if options["backend"] else Backend.values
        verdicts = []
        for backend in backends:
            config, _ = read_config(
                options["config"],
                seed=options["seed"],
                backend=backend,
                election_id="attack-demo",
            )
            outcome = run_attack_demo(config, options["voters"])
            for probe in ("real", "fake"):
                verdict = ProbeVerdict(outcome[probe]["verdict"])
                self.stdout.write(
                    f"{backend}: probe with the {probe} credential -> {verdict} "
                    f"({NARRATIVE[verdict]})"
                )
            verdicts.append(outcome)
        self.emit({"verdicts": verdicts})
