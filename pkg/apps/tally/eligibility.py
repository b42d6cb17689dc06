"""
Stuffing check for preimage-bound credentials.
"""
import logging

from apps.board.models import EntryKind
from apps.core.exceptions import ConfigurationError

from .common import ElectionView, verify_proofs
from .models import Stage, WeedingReport

logger = logging.getLogger(__name__)

TRUE = b"\x01"


def eligibility_weed(
    board, oracle, talliers, ballots=None, report: WeedingReport | None = None, counters=None
) -> WeedingReport:
    """
    Keep ballots whose E(x) hashes to the plaintext of E(sigma).

    ``ballots`` are (board index, ballot) pairs that already passed proof
    verification; when omitted they are read from the board. Ballots without
    a preimage ciphertext, or whose check fails, are removed and flagged as
    possible stuffing. Each check is posted with the oracle's evaluation and
    decryption records.
    """
    report = report if report is not None else WeedingReport()
    if ballots is None:
        view = ElectionView.from_transcript(board.transcript())
        if not view.config.eligibility:
            raise ConfigurationError("Election does not bind credentials to preimages")
        ballots = verify_proofs(view, report)

    author = f"tallier-{talliers.quorum[0]}"
    survivors = []
    for index, ballot in ballots:
        payload = {"stage": "eligibility", "ballot": index}
        if ballot.preimage is None:
            payload.update(verdict=False, missing=True)
        else:
            check, evaluation = oracle.eval_hash_preimage_eq(ballot.preimage, ballot.credential)
            opened = oracle.threshold_decrypt(check, talliers.approvals(check))
            if counters is not None:
                counters.decrypt_count += 1
            payload.update(
                verdict=opened.plaintext == TRUE,
                check=check.to_dict(),
                evaluation=evaluation.to_dict(),
                decryption=opened.record.to_dict(),
                value=opened.plaintext.hex(),
            )

        entry = board.append(EntryKind.HASH_POST, payload, author)
        report.cite(Stage.ELIGIBLE, entry.index)
        if payload["verdict"]:
            survivors.append(index)
        else:
            report.flagged.append(index)

    report.record(Stage.ELIGIBLE, survivors)
    if report.flagged:
        logger.warning(
            f"{len(report.flagged)} ballots flagged as possible stuffing",
            extra={"flagged": list(report.flagged)},
        )
    return report
