"""
Keyed-hash tally on the FHE path.

Credentials are hashed under the encryption with a fresh oracle key per
stage and the digests decrypted, so duplicate removal and roll matching are
hash-table lookups: n' + n'' + |L| hash evaluations in total.
"""
import logging

from apps.board.models import AuthorRole, EntryKind
from apps.election.models import Backend

from .common import (
    TallyBackend,
    match_roll,
    resolve_duplicates,
    surviving_board_indices,
    verify_proofs,
)
from .eligibility import eligibility_weed
from .models import Stage, TallyResult

logger = logging.getLogger(__name__)


class LinearTally(TallyBackend):
    backend = Backend.LINEAR
    classical = False

    def __init__(self, board, talliers, oracle, **options):
        super().__init__(board, talliers, oracle=oracle, **options)

    def weed_and_count(self):
        view = self.view
        valid = verify_proofs(view, self.report)
        if view.config.eligibility:
            eligibility_weed(
                self.board,
                self.oracle,
                self.panel,
                ballots=valid,
                report=self.report,
                counters=self.counters,
            )
            eligible = set(self.report.survivors(Stage.ELIGIBLE))
            valid = [(index, ballot) for index, ballot in valid if index in eligible]

        kept = self._weed_duplicates(valid)

        batch = self.mix_and_post(
            "ballots",
            [[ballot.vote for _, ballot in kept], [ballot.credential for _, ballot in kept]],
            view.schemes(self.oracle, width=2),
        )
        roll = self.mix_and_post(
            "roll", [[ct for _, ct in view.roll]], view.schemes(self.oracle, width=1)
        )

        rows = self._weed_unregistered(batch.column(1), roll.column(0))
        counts, spoiled = self.decrypt_votes(batch.column(0), rows)
        surviving = surviving_board_indices([index for index, _ in kept], batch.permutation, rows)
        return counts, spoiled, surviving

    def _new_key(self, label: str, stage: str):
        key = self.oracle.new_hash_key(label)
        self.post(
            EntryKind.HASH_POST,
            {"stage": "hash-key", "label": label, "key": key.to_dict()},
            stage,
            author=str(AuthorRole.ORACLE),
        )
        return key

    def _hash(self, ct, key) -> tuple[bytes, dict]:
        digest, evaluation = self.oracle.eval_keyed_hash(ct, key)
        self.counters.hash_eval_count += 1
        opened = self.oracle.threshold_decrypt(digest, self.panel.approvals(digest))
        self.counters.decrypt_count += 1
        evidence = {
            "digest": digest.to_dict(),
            "evaluation": evaluation.to_dict(),
            "decryption": opened.record.to_dict(),
            "value": opened.plaintext.hex(),
        }
        return opened.plaintext, evidence

    def _weed_duplicates(self, valid):
        key = self._new_key("dedup", Stage.DEDUPLICATED)
        digests = []
        for index, ballot in valid:
            value, evidence = self._hash(ballot.credential, key)
            self.post(
                EntryKind.HASH_POST,
                {"stage": "duplicates", "ballot": index, **evidence},
                Stage.DEDUPLICATED,
            )
            digests.append(value)

        positions = resolve_duplicates(digests, self.view.config.duplicate_policy)
        kept = [valid[position] for position in positions]
        self.report.record(Stage.DEDUPLICATED, [index for index, _ in kept])
        return kept

    def _weed_unregistered(self, credentials, roll) -> list[int]:
        key = self._new_key("roll", Stage.REGISTERED)
        digests = {}
        for side, cts in (("ballots", credentials), ("roll", roll)):
            digests[side] = []
            for row, ct in enumerate(cts):
                value, evidence = self._hash(ct, key)
                self.post(
                    EntryKind.HASH_POST,
                    {"stage": "roll", "side": side, "row": row, **evidence},
                    Stage.REGISTERED,
                )
                digests[side].append(value)

        rows = match_roll(digests["ballots"], digests["roll"], label="roll")
        self.report.record(Stage.REGISTERED, rows)
        return rows


def tally_linear(board, talliers, oracle, **options) -> TallyResult:
    return LinearTally(board, talliers, oracle, **options).run()
