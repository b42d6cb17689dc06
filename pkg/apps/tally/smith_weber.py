"""
Blinded-exponent tally.

The quorum raises each credential ciphertext to a jointly held secret z, one
tallier at a time with an exponent-consistency proof against a per-stage
commitment g1^z_i. Decrypting gives sigma^z, so equal credentials collide and
weeding becomes a hash-table lookup. The blinded values are public, which is
what the exponent probe exploits.
"""
import logging

from apps.board.models import EntryKind
from apps.core.encoding import hex_int
from apps.crypto import elgamal
from apps.crypto.nizk import prove_exponent_consistency
from apps.crypto.pet import BlindingContribution
from apps.election.models import Backend

from .common import (
    TallyBackend,
    match_roll,
    resolve_duplicates,
    surviving_board_indices,
    verify_proofs,
)
from .models import Stage, TallyResult

logger = logging.getLogger(__name__)


def blinding_context(ctx, label: str):
    return ctx.bind(f"blinding/{label}")


def blinded_context(ctx, label: str):
    return ctx.bind(f"blinded/{label}")


class SmithWeberTally(TallyBackend):
    backend = Backend.SMITH_WEBER

    def weed_and_count(self):
        view = self.view
        valid = verify_proofs(view, self.report)

        values = self._blind(
            "duplicates",
            Stage.DEDUPLICATED,
            ballots=([index for index, _ in valid], [ballot.credential for _, ballot in valid]),
        )
        positions = resolve_duplicates(values["ballots"], view.config.duplicate_policy)
        kept = [valid[position] for position in positions]
        self.report.record(Stage.DEDUPLICATED, [index for index, _ in kept])

        batch = self.mix_and_post(
            "ballots",
            [[ballot.vote for _, ballot in kept], [ballot.credential for _, ballot in kept]],
            view.schemes(width=2),
        )
        roll = self.mix_and_post("roll", [[ct for _, ct in view.roll]], view.schemes(width=1))

        values = self._blind(
            "roll",
            Stage.REGISTERED,
            ballots=(list(range(len(kept))), batch.column(1)),
            roll=(list(range(len(view.roll))), roll.column(0)),
        )
        rows = match_roll(values["ballots"], values["roll"], label="roll")
        self.report.record(Stage.REGISTERED, rows)

        counts, spoiled = self.decrypt_votes(batch.column(0), rows)
        surviving = surviving_board_indices([index for index, _ in kept], batch.permutation, rows)
        return counts, spoiled, surviving

    def _blind(self, label: str, stage: str, **sides) -> dict[str, list[int]]:
        """
        Blind and open every ciphertext of every side under one set of stage
        exponents; post the commitments, chains and openings as one entry.
        """
        params = self.view.params
        exponents = self.panel.blinding_exponents(label)
        commitments = {index: params.exp(params.g1, z) for index, z in exponents.items()}
        proof_ctx = blinding_context(self.view.ctx, label)
        open_ctx = blinded_context(self.view.ctx, label)

        payload = {
            "stage": label,
            "commitments": {str(index): hex_int(value) for index, value in commitments.items()},
        }
        values: dict[str, list[int]] = {}
        for side, (sources, ciphertexts) in sides.items():
            rows, side_values = [], []
            for source, ct in zip(sources, ciphertexts):
                chain = []
                current = ct
                for index, z in exponents.items():
                    power = elgamal.power(params, current, z)
                    proof = prove_exponent_consistency(
                        params,
                        (params.g1, *current.components()),
                        (commitments[index], *power.components()),
                        z,
                        proof_ctx,
                        self.panel.rng,
                    )
                    chain.append(BlindingContribution(index=index, power=power, proof=proof))
                    current = power
                opened = self.panel.decrypt(current, open_ctx)
                self.counters.hash_eval_count += 1
                self.counters.decrypt_count += 1
                rows.append(
                    {
                        "source": source,
                        "chain": [link.to_dict() for link in chain],
                        "shares": [share.to_dict() for share in opened.shares],
                        "value": hex_int(opened.plaintext),
                    }
                )
                side_values.append(opened.plaintext)
            payload[side] = rows
            values[side] = side_values

        self.post(EntryKind.HASH_POST, payload, stage)
        logger.debug(
            f"Blinded stage {label} posted",
            extra={"stage": label, "rows": {side: len(v) for side, v in values.items()}},
        )
        return values


def tally_smith_weber(board, talliers, **options) -> TallyResult:
    return SmithWeberTally(board, talliers, **options).run()
