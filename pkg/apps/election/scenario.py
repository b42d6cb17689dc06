"""
Seeded election scenarios with a plaintext ground truth.

The ground truth is computed from bookkeeping alone (who cast what, with
which credential) and never consults a tallying backend.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from apps.core.drbg import Drbg
from apps.core.encoding import encode
from apps.core.exceptions import ConfigurationError
from apps.core.tracing import trace_phase

from .models import CastRecord, CoercionOutcome, DuplicatePolicy, ElectionConfig
from .protocol import Election

logger = logging.getLogger(__name__)


@dataclass
class Scenario:
    election: Election
    expected: dict[str, int]
    removals: dict[str, int]
    ledger: list[CastRecord]
    coercions: list[CoercionOutcome] = field(default_factory=list)
    expected_surviving: tuple[int, ...] = ()

    @property
    def roll_size(self) -> int:
        return len(self.election.voters)

    def ground_truth(self) -> dict:
        return {
            "counts": dict(self.expected),
            **self.removals,
            "surviving": list(self.expected_surviving),
        }


def _seed_bytes(seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    return str(seed).encode("utf-8")


def expected_tally(ledger: list[CastRecord], config: ElectionConfig):
    """Apply the weeding rules to plaintext bookkeeping, in board order."""
    ledger = sorted(ledger, key=lambda record: record.board_index)
    valid = [record for record in ledger if record.proof_valid]
    eligible = [record for record in valid if record.eligible] if config.eligibility else valid

    chosen: dict[str, CastRecord] = {}
    for record in eligible:
        if config.duplicate_policy == DuplicatePolicy.KEEP_FIRST:
            chosen.setdefault(record.credential_key, record)
        else:
            chosen[record.credential_key] = record
    kept = sorted(chosen.values(), key=lambda record: record.board_index)
    registered = [record for record in kept if record.registered]

    counts = {name: 0 for name in config.candidates}
    counts.update(Counter(record.choice for record in registered))
    removals = {
        "proof_rejected": len(ledger) - len(valid),
        "stuffing_flagged": len(valid) - len(eligible),
        "duplicates_removed": len(eligible) - len(kept),
        "invalid_removed": len(kept) - len(registered),
    }
    surviving = tuple(record.board_index for record in registered)
    return counts, removals, surviving


def generate_scenario(
    n_honest: int,
    n_duplicate: int,
    n_invalid: int,
    n_coerced: int,
    config: ElectionConfig,
    seed=None,
    *,
    n_bad_proof: int = 0,
    n_stuffed: int = 0,
    path: str | Path | None = None,
) -> Scenario:
    """
    Populate a board and return it with the expected tally.

    Registered voters are the honest, coerced and (eligibility mode) stuffed
    ones, so |L| = n_honest + n_coerced + n_stuffed. First ballots, coercer
    ballots with fake credentials, invalid-credential ballots and stuffed
    ballots are posted in a shuffled first wave; re-votes, coerced voters'
    real ballots and bad-proof ballots follow in a shuffled second wave.
    The shuffle and every choice come from a plan stream that does not
    depend on the backend.
    """
    counts = (n_honest, n_duplicate, n_invalid, n_coerced, n_bad_proof, n_stuffed)
    if any(count < 0 for count in counts):
        raise ConfigurationError("Scenario counts must be non-negative")
    if n_duplicate > n_honest:
        raise ConfigurationError("Duplicate ballots re-use honest voters' credentials")
    if n_stuffed and not config.eligibility:
        raise ConfigurationError("Stuffed ballots are only generated in eligibility mode")
    if seed is not None:
        config = replace(config, seed=_seed_bytes(seed))

    plan = Drbg(encode("scenario-plan", config.seed, config.election_id))
    candidates = config.candidates
    election = Election(config, path).setup()
    ledger: list[CastRecord] = []
    coercions: list[CoercionOutcome] = []

    with trace_phase("scenario", voters=n_honest + n_coerced + n_stuffed):
        honest = election.register(n_honest)
        coerced = election.register(n_coerced)
        abstaining = election.register(n_stuffed)
        registered = {voter.credential.key for voter in election.voters}

        def record(receipt, credential, choice, label, proof_valid=True, eligible=True):
            ledger.append(
                CastRecord(
                    board_index=receipt.index,
                    credential_key=credential.key,
                    choice=choice,
                    proof_valid=proof_valid,
                    registered=credential.key in registered,
                    eligible=eligible,
                    label=label,
                )
            )

        fakes = {}
        first_wave = (
            [("honest", voter) for voter in honest]
            + [("coerced-fake", voter) for voter in coerced]
            + [("invalid", None)] * n_invalid
            + [("stuffed", voter) for voter in abstaining]
        )
        plan.shuffle(first_wave)
        for action, voter in first_wave:
            choice = plan.choice(candidates)
            if action == "honest":
                receipt = election.cast_vote(voter.credential, choice)
                record(receipt, voter.credential, choice, action)
            elif action == "coerced-fake":
                fake = election.fake_credential()
                fakes[voter.index] = (fake, choice, election.cast_vote(fake, choice))
                record(fakes[voter.index][2], fake, choice, action)
            elif action == "invalid":
                credential = election.new_credential()
                record(election.cast_vote(credential, choice), credential, choice, action)
            else:
                receipt = election.cast_stuffed(voter, choice)
                record(receipt, voter.credential, choice, action, eligible=False)

        second_wave = (
            [("duplicate", voter) for voter in honest[:n_duplicate]]
            + [("coerced-real", voter) for voter in coerced]
            + [("bad-proof", None)] * n_bad_proof
        )
        plan.shuffle(second_wave)
        for action, voter in second_wave:
            choice = plan.choice(candidates)
            if action == "duplicate":
                receipt = election.cast_vote(voter.credential, choice)
                record(receipt, voter.credential, choice, action)
            elif action == "coerced-real":
                receipt = election.cast_vote(voter.credential, choice)
                record(receipt, voter.credential, choice, action)
                fake, coercer_choice, fake_receipt = fakes[voter.index]
                coercions.append(
                    CoercionOutcome(
                        voter=voter,
                        fake_credential=fake,
                        fake_receipt=fake_receipt,
                        real_receipt=receipt,
                        coercer_choice=coercer_choice,
                        real_choice=choice,
                    )
                )
            else:
                credential = (
                    plan.choice(honest).credential if honest else election.new_credential()
                )
                receipt = election.cast_invalid_proof(credential, choice)
                record(receipt, credential, choice, action, proof_valid=False)

    expected, removals, surviving = expected_tally(ledger, config)
    logger.info(
        "Scenario generated",
        extra={"ballots": len(ledger), "roll": len(election.voters), "expected": expected},
    )
    return Scenario(
        election=election,
        expected=expected,
        removals=removals,
        ledger=sorted(ledger, key=lambda item: item.board_index),
        coercions=coercions,
        expected_surviving=surviving,
    )
