from django.core.management.base import CommandError

from apps.bench.cli import ElectionCommand, write_json
from apps.board.board import load_transcript
from apps.tally.audit import audit
from apps.tally.serializers import AuditReportSerializer


class Command(ElectionCommand):
    help = "Re-verify a transcript from public data; exits 0 only if every check passes."

    def add_arguments(self, parser):
        parser.add_argument("transcript", help="Transcript path (JSON Lines)")
        parser.add_argument("--backend", help="Backend to audit as (default: as posted)")
        parser.add_argument("--out", help="Write the audit report to this path")

    def run(self, run_id, **options):
        transcript = load_transcript(options["transcript"])
        report = audit(transcript, options["backend"])
        data = AuditReportSerializer(report).data
        if options["out"]:
            write_json(options["out"], data)
        self.emit(data)
        if not report:
            checks = ", ".join(sorted({failure.check for failure in report.failures}))
            raise CommandError(f"Audit failed: {checks}", returncode=1)
