"""
Pairwise-PET tally.

Duplicate removal runs a PET between every pair of proof-valid credential
ciphertexts, and roll matching runs one between every mixed ballot credential
and every mixed roll entry, so the work grows with the square of the board.
"""
import logging

from apps.board.models import EntryKind
from apps.core.exceptions import TallyAbortedError
from apps.crypto.pet import PetTranscript, pet
from apps.election.models import Backend

from .common import (
    DisjointSet,
    TallyBackend,
    resolve_duplicates,
    surviving_board_indices,
    verify_proofs,
)
from .models import Stage, TallyResult

logger = logging.getLogger(__name__)


class QuadraticTally(TallyBackend):
    """
    In canonical mode every pair is tested with no early exit, giving exactly
    n'(n'-1)/2 + n''|L| PETs. The optimized mode skips rows already known to
    be duplicates and stops at the first roll match.
    """

    backend = Backend.QUADRATIC

    def weed_and_count(self):
        view = self.view
        valid = verify_proofs(view, self.report)
        kept = self._weed_duplicates(valid)

        batch = self.mix_and_post(
            "ballots",
            [[ballot.vote for _, ballot in kept], [ballot.credential for _, ballot in kept]],
            view.schemes(width=2),
        )
        roll = self.mix_and_post("roll", [[ct for _, ct in view.roll]], view.schemes(width=1))

        rows = self._weed_unregistered(batch.column(1), roll.column(0))
        counts, spoiled = self.decrypt_votes(batch.column(0), rows)
        surviving = surviving_board_indices([index for index, _ in kept], batch.permutation, rows)
        return counts, spoiled, surviving

    def _pet(self, left, right) -> PetTranscript:
        transcript = pet(self.panel, left, right, self.view.ctx)
        self.counters.pet_count += 1
        self.counters.decrypt_count += 1
        if not transcript.valid:
            raise TallyAbortedError("PET blinding evidence failed", index=len(self.board))
        return transcript

    def _weed_duplicates(self, valid):
        n = len(valid)
        classes = DisjointSet(n)
        for a in range(n):
            if not self.canonical and classes.find(a) != a:
                continue
            tests = []
            for b in range(a + 1, n):
                if not self.canonical and classes.find(b) != b:
                    continue
                transcript = self._pet(valid[a][1].credential, valid[b][1].credential)
                if transcript.verdict:
                    classes.union(a, b)
                tests.append({"against": valid[b][0], "pet": transcript.to_dict()})
            if tests:
                self.post(
                    EntryKind.PET,
                    {"stage": "duplicates", "ballot": valid[a][0], "tests": tests},
                    Stage.DEDUPLICATED,
                )

        positions = resolve_duplicates(
            [classes.find(i) for i in range(n)], self.view.config.duplicate_policy
        )
        kept = [valid[position] for position in positions]
        self.report.record(Stage.DEDUPLICATED, [index for index, _ in kept])
        return kept

    def _weed_unregistered(self, credentials, roll) -> list[int]:
        consumed: set[int] = set()
        rows = []
        for k, credential in enumerate(credentials):
            tests, match = [], None
            for position, entry in enumerate(roll):
                if not self.canonical and position in consumed:
                    continue
                transcript = self._pet(credential, entry)
                tests.append({"against": position, "pet": transcript.to_dict()})
                if transcript.verdict and match is None and position not in consumed:
                    match = position
                    if not self.canonical:
                        break
            if match is not None:
                consumed.add(match)
                rows.append(k)
            elif any(test["pet"]["verdict"] for test in tests):
                logger.warning(
                    "Ballot matched an already consumed roll entry", extra={"row": k}
                )
            self.post(
                EntryKind.PET,
                {"stage": "roll", "row": k, "match": match, "tests": tests},
                Stage.REGISTERED,
            )
        self.report.record(Stage.REGISTERED, rows)
        return rows


def tally_quadratic(board, talliers, **options) -> TallyResult:
    return QuadraticTally(board, talliers, **options).run()
