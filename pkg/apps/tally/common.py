"""
Pieces shared by the tallying backends and the auditor.
"""
import logging
from dataclasses import dataclass, field

from apps.board.models import EntryKind, Transcript
from apps.core.drbg import Drbg
from apps.core.encoding import encode, parse_hex_int
from apps.core.exceptions import TallyAbortedError
from apps.core.tracing import trace_phase
from apps.crypto.elgamal import ElGamalCiphertext, PublicKey
from apps.crypto.group import GroupParams, metering
from apps.crypto.nizk import ProofContext, verify_ballot
from apps.election.models import Ballot, DuplicatePolicy, ElectionConfig, RollEntry
from apps.fhe.models import (
    FheCiphertext,
    FhePublicKey,
    OracleOperation,
    OracleRecord,
    PlaintextTag,
)
from apps.fhe.oracle import verify_attestation
from apps.mixnet.mix import MixBatch, MixServer, mix
from apps.mixnet.schemes import ElGamalScheme, FheScheme

from .models import OpCounters, Stage, TallyResult, WeedingReport

logger = logging.getLogger(__name__)

VOTE_CONTEXT = "vote-decryption"


@dataclass
class ElectionView:
    """Public election state as read back from the board."""

    config: ElectionConfig
    slate: tuple
    ctx: ProofContext
    params: GroupParams | None = None
    public: PublicKey | None = None
    commitments: dict[int, int] = field(default_factory=dict)
    fhe_key: FhePublicKey | None = None
    roll: list[tuple[int, object]] = field(default_factory=list)
    ballots: list[tuple[int, Ballot | None]] = field(default_factory=list)

    @property
    def threshold(self) -> int:
        return self.config.threshold

    @property
    def is_classical(self) -> bool:
        return self.config.is_classical

    @classmethod
    def from_transcript(cls, transcript: Transcript) -> "ElectionView":
        election = transcript.params_entry("election")
        if election is None:
            raise TallyAbortedError("Board has no election parameters")
        config = ElectionConfig.from_public(election.data["config"])
        view = cls(config=config, slate=(), ctx=ProofContext(election_id=config.election_id))

        if config.is_classical:
            group = transcript.params_entry("group")
            key = transcript.params_entry("tallier-key")
            if group is None or key is None:
                raise TallyAbortedError("Board has no group or tallier key")
            view.params = GroupParams.from_dict(group.data)
            view.public = PublicKey(params=view.params, h=parse_hex_int(key.data["h"]))
            view.commitments = {
                int(index): parse_hex_int(value) for index, value in key.data["commitments"].items()
            }
            view.slate = tuple(parse_hex_int(c) for c in election.data["slate"])
        else:
            key = transcript.params_entry("fhe-key")
            if key is None:
                raise TallyAbortedError("Board has no FHE key")
            view.fhe_key = FhePublicKey.from_dict(key.data)
            view.slate = tuple(election.data["slate"])

        for entry in transcript.query(EntryKind.ROLL):
            view.roll.append((entry.index, RollEntry.from_payload(entry.data).ciphertext))
        for entry in transcript.query(EntryKind.BALLOT):
            try:
                ballot = Ballot.from_payload(entry.data)
            except (KeyError, TypeError, ValueError):
                ballot = None
            view.ballots.append((entry.index, ballot))
        return view

    def schemes(self, oracle=None, width: int = 2) -> tuple:
        if self.is_classical:
            scheme = ElGamalScheme(self.public)
        else:
            scheme = FheScheme(oracle, self.fhe_key.verify_key)
        return (scheme,) * width


def ballot_is_valid(view: ElectionView, ballot: Ballot | None) -> bool:
    """Step-one check: proof bundle (classical) or ballot attestation (FHE)."""
    if ballot is None:
        return False
    if view.is_classical:
        if not isinstance(ballot.vote, ElGamalCiphertext) or not isinstance(
            ballot.credential, ElGamalCiphertext
        ):
            return False
        if ballot.proof is None or isinstance(ballot.proof, OracleRecord):
            return False
        try:
            return verify_ballot(
                view.public, ballot.vote, ballot.credential, view.slate, ballot.proof, view.ctx
            )
        except (TypeError, ValueError, ZeroDivisionError):
            return False

    record = ballot.proof
    if not isinstance(record, OracleRecord):
        return False
    expected = [(ballot.vote, PlaintextTag.VOTE), (ballot.credential, PlaintextTag.CREDENTIAL)]
    if ballot.preimage is not None:
        expected.append((ballot.preimage, PlaintextTag.PREIMAGE))
    if any(not isinstance(ct, FheCiphertext) or ct.tag != tag for ct, tag in expected):
        return False
    return (
        verify_attestation(record, view.fhe_key.verify_key, OracleOperation.BALLOT)
        and record.context == view.config.election_id.hex()
        and record.inputs == tuple(ct.digest for ct, _ in expected)
    )


class DisjointSet:
    """Union-find keyed by position; every class is rooted at its smallest member."""

    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, item: int) -> int:
        while self.parent[item] != item:
            self.parent[item] = self.parent[self.parent[item]]
            item = self.parent[item]
        return item

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def resolve_duplicates(keys: list, policy: str) -> list[int]:
    """Positions kept when ballots with equal keys collapse to one, in board order."""
    chosen: dict = {}
    for position, key in enumerate(keys):
        if policy == DuplicatePolicy.KEEP_FIRST:
            chosen.setdefault(key, position)
        else:
            chosen[key] = position
    return sorted(chosen.values())


def match_roll(ballot_keys: list, roll_keys: list, label: str = "") -> list[int]:
    """
    Rows whose key appears among the roll keys; each roll key validates at
    most one ballot.
    """
    available: dict = {}
    for key in roll_keys:
        available[key] = available.get(key, 0) + 1
    collisions = sum(count - 1 for count in available.values() if count > 1)
    if collisions:
        logger.warning(
            "Roll digest collision", extra={"stage": label, "collisions": collisions}
        )

    kept = []
    for row, key in enumerate(ballot_keys):
        remaining = available.get(key, 0)
        if remaining:
            available[key] = remaining - 1
            kept.append(row)
        elif key in available:
            logger.warning(
                "Ballot matched an already consumed roll entry",
                extra={"stage": label, "row": row},
            )
    return kept


def default_mix_servers(config: ElectionConfig) -> list[MixServer]:
    return [MixServer(f"mix-{i}") for i in range(config.mix_servers)]


def verify_proofs(view: ElectionView, report: WeedingReport) -> list[tuple[int, Ballot]]:
    report.record(Stage.POSTED, [index for index, _ in view.ballots])
    valid = [(index, ballot) for index, ballot in view.ballots if ballot_is_valid(view, ballot)]
    rejected = len(view.ballots) - len(valid)
    if rejected:
        logger.warning(
            f"{rejected} ballots failed proof verification", extra={"rejected": rejected}
        )
    report.record(Stage.PROOF_VALID, [index for index, _ in valid])
    return valid


def count_votes(view: ElectionView, plaintexts) -> tuple[dict[str, int], int]:
    """Map decrypted votes to candidates; anything off the slate is spoiled."""
    counts = {name: 0 for name in view.config.candidates}
    lookup = dict(zip(view.slate, view.config.candidates))
    spoiled = 0
    for plaintext in plaintexts:
        if isinstance(plaintext, bytes):
            plaintext = plaintext.decode("utf-8", errors="replace")
        name = lookup.get(plaintext)
        if name is None:
            spoiled += 1
        else:
            counts[name] += 1
    return counts, spoiled


def removal_counts(report: WeedingReport) -> dict[str, int]:
    posted = len(report.survivors(Stage.POSTED))
    valid = len(report.survivors(Stage.PROOF_VALID))
    eligible = len(report.stages.get(str(Stage.ELIGIBLE), report.survivors(Stage.PROOF_VALID)))
    deduplicated = len(report.survivors(Stage.DEDUPLICATED))
    registered = len(report.survivors(Stage.REGISTERED))
    return {
        "proof_rejected": posted - valid,
        "stuffing_flagged": valid - eligible,
        "duplicates_removed": eligible - deduplicated,
        "invalid_removed": deduplicated - registered,
    }


def surviving_board_indices(kept: list[int], permutation, rows: list[int]) -> tuple[int, ...]:
    """Undo the secret mix permutation for the counted rows."""
    origin = {position: kept[i] for i, position in enumerate(permutation)}
    return tuple(sorted(origin[row] for row in rows))


class TallyBackend:
    """
    Shared driver for the three backends.

    Subclasses implement ``weed_and_count``, which posts its evidence through
    ``post`` and returns (counts, spoiled, surviving board indices). The run
    is metered so the result carries the exponentiation count.
    """

    backend: str = ""
    classical: bool = True

    def __init__(
        self,
        board,
        panel,
        *,
        oracle=None,
        mix_servers=None,
        rng: Drbg | None = None,
        canonical: bool | None = None,
        shadow_rounds: int | None = None,
    ):
        self.board = board
        self.panel = panel
        self.oracle = oracle
        self.view = ElectionView.from_transcript(board.transcript())
        if self.view.is_classical != self.classical:
            raise TallyAbortedError(
                "Backend does not match the election's encryption",
                backend=self.backend,
                election=str(self.view.config.backend),
            )
        config = self.view.config
        self.mix_servers = list(mix_servers or default_mix_servers(config))
        self.rng = rng or Drbg(encode("tally", board.entries[-1].entry_hash))
        self.canonical = config.canonical_counts if canonical is None else canonical
        self.shadow_rounds = shadow_rounds or config.shadow_rounds
        self.counters = OpCounters()
        self.report = WeedingReport()
        self.author = f"tallier-{panel.quorum[0]}"

    def post(self, kind, payload: dict, stage: str, author: str | None = None):
        entry = self.board.append(kind, payload, author or self.author)
        self.report.cite(stage, entry.index)
        return entry

    def mix_and_post(self, label: str, columns, schemes) -> MixBatch:
        batch = mix(
            self.mix_servers,
            columns,
            schemes,
            self.rng.child(f"mix/{label}"),
            label=label,
            shadow_rounds=self.shadow_rounds,
        )
        self.counters.mix_count += 1
        self.post(
            EntryKind.MIX,
            {"label": label, "batch": batch.to_dict(schemes)},
            Stage.REGISTERED,
            author=self.mix_servers[0].name,
        )
        return batch

    def weed_and_count(self) -> tuple[dict[str, int], int, tuple[int, ...]]:
        raise NotImplementedError

    def run(self) -> TallyResult:
        config = self.view.config
        with trace_phase(
            "tally", election=config.election_id.hex(), backend=self.backend
        ), metering() as meter:
            counts, spoiled, surviving = self.weed_and_count()
            self.counters.exponentiation_count = meter.count
        return self.finalize(counts, spoiled, surviving)

    def finalize(self, counts: dict[str, int], spoiled: int, surviving=()) -> TallyResult:
        """Post the result entry; it records the board length including itself."""
        result = TallyResult(
            backend=self.backend,
            counts=counts,
            spoiled=spoiled,
            counters=self.counters,
            weeding=self.report,
            board_length=len(self.board) + 1,
            surviving=tuple(surviving),
            **removal_counts(self.report),
        )
        entry = self.board.append(EntryKind.RESULT, result.to_payload(), self.author)
        logger.info(
            f"Tally posted at board index {entry.index}",
            extra={"backend": self.backend, "counts": counts, "index": entry.index},
        )
        return result

    def open_vote(self, ct) -> tuple[dict, object]:
        if self.classical:
            transcript = self.panel.decrypt(ct, self.view.ctx.bind(VOTE_CONTEXT))
            return transcript.to_dict(), transcript.plaintext
        opened = self.oracle.threshold_decrypt(ct, self.panel.approvals(ct))
        evidence = {
            "ciphertext": ct.to_dict(),
            "record": opened.record.to_dict(),
            "plaintext": opened.plaintext.hex(),
        }
        return evidence, opened.plaintext

    def decrypt_votes(self, votes, rows: list[int]) -> tuple[dict[str, int], int]:
        """Verifiably decrypt the surviving vote rows and count them."""
        evidence, plaintexts = [], []
        for row in rows:
            record, plaintext = self.open_vote(votes[row])
            self.counters.decrypt_count += 1
            evidence.append(record)
            plaintexts.append(plaintext)
        self.post(
            EntryKind.DECRYPTION,
            {"stage": "votes", "rows": list(rows), "decryptions": evidence},
            Stage.COUNTED,
        )
        self.report.record(Stage.COUNTED, rows)
        counts, spoiled = count_votes(self.view, plaintexts)
        if spoiled:
            logger.warning(
                f"{spoiled} decrypted votes are off the slate", extra={"spoiled": spoiled}
            )
        return counts, spoiled
