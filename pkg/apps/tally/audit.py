"""
Transcript auditor.

Replays every published check from the board alone: the hash chain and
author policy, ballot proofs, PET transcripts, blinding chains, keyed-hash
attestations, mix proofs and decryptions. It then recomputes the tally from
that evidence and compares it with the posted result.
"""
import logging
from dataclasses import asdict, dataclass, field

from apps.board.authorization import authorize
from apps.board.board import check_length_attestation, verify_chain
from apps.board.models import EntryKind, Transcript
from apps.core.encoding import parse_hex_int
from apps.core.exceptions import ElectionError, EvidenceRejectedError, UnauthorizedAuthorError
from apps.crypto.nizk import verify_exponent_consistency
from apps.crypto.pet import BlindingContribution, PetTranscript, verify_pet
from apps.crypto.threshold import DecryptionShare, DecryptionTranscript, verify_decryption
from apps.election.models import Backend
from apps.fhe.models import FheCiphertext, HashKey, OracleOperation, OracleRecord
from apps.fhe.oracle import verify_attestation, verify_decryption_record
from apps.mixnet.mix import MixBatch, verify_mix

from .common import (
    VOTE_CONTEXT,
    DisjointSet,
    ElectionView,
    ballot_is_valid,
    count_votes,
    match_roll,
    resolve_duplicates,
)
from .eligibility import TRUE
from .models import TallyResult
from .smith_weber import blinded_context, blinding_context

logger = logging.getLogger(__name__)

MALFORMED = (
    ElectionError,
    KeyError,
    TypeError,
    ValueError,
    IndexError,
    AttributeError,
    ZeroDivisionError,
)


def reject(message: str, index: int | None = None):
    raise EvidenceRejectedError(message, index=index)


@dataclass(frozen=True)
class AuditFailure:
    check: str
    message: str
    index: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AuditReport:
    """Outcome of one audit; truthy iff every check passed."""

    backend: str
    failures: list[AuditFailure] = field(default_factory=list)
    passed: list[str] = field(default_factory=list)
    recomputed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def fail(self, check: str, message: str, index: int | None = None) -> None:
        self.failures.append(AuditFailure(check=check, message=message, index=index))

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "ok": self.ok,
            "passed": list(self.passed),
            "failures": [failure.to_dict() for failure in self.failures],
            "recomputed": dict(self.recomputed),
        }


class Auditor:
    """
    One pass over a transcript. Checks run independently so the report
    lists every failing area; a check stops at its first rejected item.
    """

    def __init__(self, transcript: Transcript, backend: str | None = None):
        self.transcript = transcript
        self.backend = backend
        self.view: ElectionView | None = None
        self.report: AuditReport | None = None
        self.pet_count = 0
        self.hash_eval_count = 0

    def run(self) -> AuditReport:
        view_error = None
        try:
            self.view = ElectionView.from_transcript(self.transcript)
        except MALFORMED as exc:
            view_error = str(exc)

        backend = self.backend or (self.view.config.backend if self.view else "")
        self.report = AuditReport(backend=str(backend))

        self._check("chain", self._check_chain)
        self._check("length", self._check_length)
        if self.view is None:
            self.report.fail("parameters", f"Election parameters unreadable: {view_error}")
        else:
            self._check("phases", self._check_phases)
            self._check("tally", self._replay)

        if self.report.ok:
            logger.info("Audit passed", extra={"backend": self.report.backend})
        else:
            for failure in self.report.failures:
                logger.warning(
                    f"Audit check {failure.check} failed: {failure.message}",
                    extra={"check": failure.check, "index": failure.index},
                )
        return self.report

    def _check(self, name: str, method) -> None:
        try:
            method()
        except EvidenceRejectedError as exc:
            self.report.fail(name, exc.detail, exc.details.get("index"))
        except MALFORMED as exc:
            self.report.fail(name, f"Malformed evidence: {exc.__class__.__name__}: {exc}")
        else:
            self.report.passed.append(name)

    # structure

    def _check_chain(self) -> None:
        verdict = verify_chain(self.transcript)
        if not verdict:
            reject(f"Hash chain broken: {verdict.reason}", verdict.failed_index)
        for entry in self.transcript.entries:
            try:
                authorize(entry.kind, entry.author)
            except UnauthorizedAuthorError:
                reject(f"{entry.author} may not post {entry.kind} entries", entry.index)

    def _check_length(self) -> None:
        if not check_length_attestation(self.transcript):
            reject("Board does not end in a result attesting its length")

    def _stage(self, kind, stage: str) -> list:
        return [
            entry
            for entry in self.transcript.query(kind)
            if isinstance(entry.data, dict) and entry.data.get("stage") == stage
        ]

    def _check_phases(self) -> None:
        mixes = self.transcript.query(EntryKind.MIX)
        required = {
            "ballot mix": [entry for entry in mixes if entry.data["label"] == "ballots"],
            "roll mix": [entry for entry in mixes if entry.data["label"] == "roll"],
            "vote decryption": self._stage(EntryKind.DECRYPTION, "votes"),
            "result": self.transcript.query(EntryKind.RESULT),
        }
        backend = self.report.backend
        if backend == Backend.SMITH_WEBER:
            required["blinded duplicates"] = self._stage(EntryKind.HASH_POST, "duplicates")
            required["blinded roll"] = self._stage(EntryKind.HASH_POST, "roll")
        if backend == Backend.LINEAR:
            required["hash keys"] = self._stage(EntryKind.HASH_POST, "hash-key")
        missing = sorted(name for name, entries in required.items() if not entries)
        if missing:
            reject(f"Missing tally phases: {', '.join(missing)}")
        duplicated = sorted(
            name for name, entries in required.items() if len(entries) > 1 and name != "hash keys"
        )
        if duplicated:
            reject(f"Phases posted more than once: {', '.join(duplicated)}")

    # replay

    def _replay(self) -> None:
        view = self.view
        backend = self.report.backend
        classical = backend != Backend.LINEAR
        if classical != view.is_classical:
            reject(f"Backend {backend} cannot tally this election")

        valid = [(index, ballot) for index, ballot in view.ballots if ballot_is_valid(view, ballot)]
        eligible = valid

        if backend == Backend.QUADRATIC:
            kept = self._pet_duplicates(valid)
            batch, roll = self._mixes(kept)
            rows = self._pet_roll(batch.column(1), roll.column(0))
        elif backend == Backend.SMITH_WEBER:
            values = self._blinded(
                "duplicates",
                ballots=([i for i, _ in valid], [ballot.credential for _, ballot in valid]),
            )
            positions = resolve_duplicates(values["ballots"], view.config.duplicate_policy)
            kept = [valid[position] for position in positions]
            batch, roll = self._mixes(kept)
            values = self._blinded(
                "roll",
                ballots=(list(range(len(kept))), batch.column(1)),
                roll=(list(range(len(view.roll))), roll.column(0)),
            )
            rows = match_roll(values["ballots"], values["roll"], label="audit")
        else:
            if view.config.eligibility:
                eligible = self._eligibility(valid)
            keys = self._hash_keys()
            kept = self._keyed_duplicates(eligible, keys["dedup"])
            batch, roll = self._mixes(kept)
            rows = self._keyed_roll(batch.column(1), roll.column(0), keys["roll"])

        counts, spoiled = self._votes(batch.column(0), rows, classical)
        self.report.recomputed = {
            "counts": counts,
            "spoiled": spoiled,
            "proof_rejected": len(view.ballots) - len(valid),
            "stuffing_flagged": len(valid) - len(eligible),
            "duplicates_removed": len(eligible) - len(kept),
            "invalid_removed": len(kept) - len(rows),
            "pet_count": self.pet_count,
            "hash_eval_count": self.hash_eval_count,
        }
        self._compare_result()

    def _compare_result(self) -> None:
        results = self.transcript.query(EntryKind.RESULT)
        if not results:
            reject("No result entry")
        entry = results[-1]
        posted = TallyResult.from_payload(entry.data)
        if posted.backend != self.report.backend:
            reject(f"Result was produced by backend {posted.backend}", entry.index)
        actual = {
            "counts": posted.counts,
            "spoiled": posted.spoiled,
            "proof_rejected": posted.proof_rejected,
            "stuffing_flagged": posted.stuffing_flagged,
            "duplicates_removed": posted.duplicates_removed,
            "invalid_removed": posted.invalid_removed,
            "pet_count": posted.counters.pet_count,
            "hash_eval_count": posted.counters.hash_eval_count,
        }
        mismatched = sorted(
            name for name, value in self.report.recomputed.items() if actual.get(name) != value
        )
        if mismatched:
            reject(f"Posted result disagrees on {', '.join(mismatched)}", entry.index)

    def _mixes(self, kept) -> tuple[MixBatch, MixBatch]:
        view = self.view
        expected = {
            "ballots": tuple((ballot.vote, ballot.credential) for _, ballot in kept),
            "roll": tuple((ct,) for _, ct in view.roll),
        }
        batches = {}
        for entry in self.transcript.query(EntryKind.MIX):
            label = entry.data["label"]
            if label not in expected:
                reject(f"Unexpected mix {label}", entry.index)
            schemes = view.schemes(width=2 if label == "ballots" else 1)
            batch = MixBatch.from_dict(entry.data["batch"], schemes)
            if batch.label != label:
                reject("Mix label does not match its batch", entry.index)
            if not verify_mix(batch, schemes, view.config.shadow_rounds):
                reject(f"Mix proof for {label} does not verify", entry.index)
            if batch.inputs != expected[label]:
                reject(f"Mix {label} input is not the list it should shuffle", entry.index)
            batches[label] = batch
        return batches["ballots"], batches["roll"]

    def _votes(self, votes, rows: list[int], classical: bool) -> tuple[dict[str, int], int]:
        view = self.view
        entry = self._stage(EntryKind.DECRYPTION, "votes")[0]
        data = entry.data
        if list(data["rows"]) != list(rows) or len(data["decryptions"]) != len(rows):
            reject("Decrypted rows are not the registered rows", entry.index)

        plaintexts = []
        for row, record in zip(rows, data["decryptions"]):
            if classical:
                transcript = DecryptionTranscript.from_dict(record)
                if transcript.ciphertext != votes[row] or not verify_decryption(
                    view.params,
                    view.commitments,
                    view.threshold,
                    transcript,
                    view.ctx.bind(VOTE_CONTEXT),
                ):
                    reject(f"Decryption of vote row {row} does not verify", entry.index)
                plaintexts.append(transcript.plaintext)
            else:
                ct = FheCiphertext.from_dict(record["ciphertext"])
                plaintext = bytes.fromhex(record["plaintext"])
                if ct != votes[row] or not verify_decryption_record(
                    OracleRecord.from_dict(record["record"]),
                    view.fhe_key.verify_key,
                    ct,
                    plaintext,
                    view.threshold,
                ):
                    reject(f"Decryption of vote row {row} does not verify", entry.index)
                plaintexts.append(plaintext)
        return count_votes(view, plaintexts)

    # pairwise PETs

    def _check_pet(self, data: dict, left, right, index: int) -> bool:
        view = self.view
        transcript = PetTranscript.from_dict(view.params, data, left, right)
        if not verify_pet(view.params, view.commitments, view.threshold, transcript, view.ctx):
            reject("PET evidence does not verify", index)
        self.pet_count += 1
        return transcript.verdict

    def _pet_duplicates(self, valid):
        view = self.view
        positions = {index: position for position, (index, _) in enumerate(valid)}
        verdicts: dict[tuple[int, int], bool] = {}
        for entry in self._stage(EntryKind.PET, "duplicates"):
            a = positions.get(entry.data["ballot"])
            if a is None:
                reject("PET names a ballot without valid proofs", entry.index)
            for test in entry.data["tests"]:
                b = positions.get(test["against"])
                if b is None or b <= a or (a, b) in verdicts:
                    reject("PET pairs are not distinct proof-valid ballots", entry.index)
                verdicts[(a, b)] = self._check_pet(
                    test["pet"], valid[a][1].credential, valid[b][1].credential, entry.index
                )

        n = len(valid)
        classes = DisjointSet(n)
        for (a, b), verdict in verdicts.items():
            if verdict:
                classes.union(a, b)
        if view.config.canonical_counts:
            compared = range(n)
        else:
            compared = sorted({classes.find(i) for i in range(n)})
        missing = [
            (a, b) for a in compared for b in compared if a < b and (a, b) not in verdicts
        ]
        if missing:
            reject(f"{len(missing)} ballot pairs were never compared")

        positions_kept = resolve_duplicates(
            [classes.find(i) for i in range(n)], view.config.duplicate_policy
        )
        return [valid[position] for position in positions_kept]

    def _pet_roll(self, credentials, roll) -> list[int]:
        canonical = self.view.config.canonical_counts
        entries = self._stage(EntryKind.PET, "roll")
        if [entry.data["row"] for entry in entries] != list(range(len(credentials))):
            reject("Roll matching does not cover every mixed ballot")

        consumed: set[int] = set()
        rows = []
        for entry in entries:
            k = entry.data["row"]
            tested: dict[int, bool] = {}
            match = None
            for test in entry.data["tests"]:
                position = test["against"]
                if not 0 <= position < len(roll) or position in tested:
                    reject("PET names an unknown roll row", entry.index)
                verdict = self._check_pet(test["pet"], credentials[k], roll[position], entry.index)
                tested[position] = verdict
                if verdict and match is None and position not in consumed:
                    match = position

            required = [
                position
                for position in range(len(roll))
                if canonical
                or (position not in consumed and (match is None or position <= match))
            ]
            if any(position not in tested for position in required):
                reject(f"Mixed ballot {k} was not compared with the whole roll", entry.index)
            if entry.data["match"] != match:
                reject(f"Posted roll match for row {k} contradicts its PETs", entry.index)
            if match is not None:
                consumed.add(match)
                rows.append(k)
        return rows

    # blinded values

    def _blinded(self, label: str, **sides) -> dict[str, list[int]]:
        view = self.view
        params = view.params
        entry = self._stage(EntryKind.HASH_POST, label)[0]
        data = entry.data
        commitments = {int(i): parse_hex_int(value) for i, value in data["commitments"].items()}
        if len(commitments) < view.threshold or any(
            value == 1 or not params.contains(value) for value in commitments.values()
        ):
            reject("Blinding commitments are degenerate", entry.index)

        values: dict[str, list[int]] = {}
        for side, (sources, ciphertexts) in sides.items():
            rows = data[side]
            if [row["source"] for row in rows] != list(sources):
                reject(f"Blinded {side} rows do not match their sources", entry.index)
            values[side] = []
            for row, ct in zip(rows, ciphertexts):
                links = [BlindingContribution.from_dict(link) for link in row["chain"]]
                if sorted(link.index for link in links) != sorted(commitments):
                    reject("Blinding chain skips a committed tallier", entry.index)
                current = ct
                for link in links:
                    if not verify_exponent_consistency(
                        params,
                        (params.g1, *current.components()),
                        (commitments[link.index], *link.power.components()),
                        link.proof,
                        blinding_context(view.ctx, label),
                    ):
                        reject("Blinding proof does not verify", entry.index)
                    current = link.power
                opened = DecryptionTranscript(
                    ciphertext=current,
                    shares=tuple(DecryptionShare.from_dict(share) for share in row["shares"]),
                    plaintext=parse_hex_int(row["value"]),
                )
                if not verify_decryption(
                    params,
                    view.commitments,
                    view.threshold,
                    opened,
                    blinded_context(view.ctx, label),
                ):
                    reject("Blinded value decryption does not verify", entry.index)
                self.hash_eval_count += 1
                values[side].append(opened.plaintext)
        return values

    # keyed hashes

    def _hash_keys(self) -> dict[str, HashKey]:
        keys = {}
        for entry in self._stage(EntryKind.HASH_POST, "hash-key"):
            label = entry.data["label"]
            if label in keys:
                reject(f"Hash key {label} posted twice", entry.index)
            keys[label] = HashKey.from_dict(entry.data["key"])
        if set(keys) != {"dedup", "roll"}:
            reject("Both stage hash keys must be posted")
        if (
            keys["dedup"].key_id == keys["roll"].key_id
            or keys["dedup"].encrypted == keys["roll"].encrypted
        ):
            reject("Roll matching reuses the duplicate-removal key")
        return keys

    def _keyed_digest(self, data: dict, ct: FheCiphertext, key: HashKey, index: int) -> bytes:
        view = self.view
        verify_key = view.fhe_key.verify_key
        digest = FheCiphertext.from_dict(data["digest"])
        evaluation = OracleRecord.from_dict(data["evaluation"])
        value = bytes.fromhex(data["value"])
        valid = (
            verify_attestation(evaluation, verify_key, OracleOperation.KEYED_HASH)
            and evaluation.inputs == (ct.digest, key.encrypted.digest)
            and evaluation.context == key.key_id
            and evaluation.output == digest.digest
            and verify_decryption_record(
                OracleRecord.from_dict(data["decryption"]),
                verify_key,
                digest,
                value,
                view.threshold,
            )
        )
        if not valid:
            reject("Keyed-hash evidence does not verify", index)
        self.hash_eval_count += 1
        return value

    def _keyed_duplicates(self, eligible, key: HashKey):
        entries = self._stage(EntryKind.HASH_POST, "duplicates")
        if [entry.data["ballot"] for entry in entries] != [index for index, _ in eligible]:
            reject("Duplicate hashing does not cover the eligible ballots")
        digests = [
            self._keyed_digest(entry.data, ballot.credential, key, entry.index)
            for entry, (_, ballot) in zip(entries, eligible)
        ]
        positions = resolve_duplicates(digests, self.view.config.duplicate_policy)
        return [eligible[position] for position in positions]

    def _keyed_roll(self, credentials, roll, key: HashKey) -> list[int]:
        entries = self._stage(EntryKind.HASH_POST, "roll")
        digests = {}
        for side, cts in (("ballots", credentials), ("roll", roll)):
            posted = [entry for entry in entries if entry.data["side"] == side]
            if [entry.data["row"] for entry in posted] != list(range(len(cts))):
                reject(f"Roll hashing does not cover every {side} row")
            digests[side] = [
                self._keyed_digest(entry.data, ct, key, entry.index)
                for entry, ct in zip(posted, cts)
            ]
        return match_roll(digests["ballots"], digests["roll"], label="audit")

    def _eligibility(self, valid):
        view = self.view
        verify_key = view.fhe_key.verify_key
        entries = self._stage(EntryKind.HASH_POST, "eligibility")
        if [entry.data["ballot"] for entry in entries] != [index for index, _ in valid]:
            reject("Eligibility checks do not cover the proof-valid ballots")

        survivors = []
        for entry, (index, ballot) in zip(entries, valid):
            data = entry.data
            if data.get("missing"):
                if ballot.preimage is not None or data["verdict"]:
                    reject("Ballot wrongly marked as missing its preimage", entry.index)
                continue
            if ballot.preimage is None:
                reject("Eligibility check on a ballot without a preimage", entry.index)
            check = FheCiphertext.from_dict(data["check"])
            evaluation = OracleRecord.from_dict(data["evaluation"])
            value = bytes.fromhex(data["value"])
            valid_evidence = (
                verify_attestation(evaluation, verify_key, OracleOperation.PREIMAGE_EQ)
                and evaluation.inputs == (ballot.preimage.digest, ballot.credential.digest)
                and evaluation.output == check.digest
                and verify_decryption_record(
                    OracleRecord.from_dict(data["decryption"]),
                    verify_key,
                    check,
                    value,
                    view.threshold,
                )
            )
            if not valid_evidence or data["verdict"] != (value == TRUE):
                reject("Eligibility evidence does not verify", entry.index)
            if data["verdict"]:
                survivors.append((index, ballot))
        return survivors


def audit(transcript: Transcript, backend: str | None = None) -> AuditReport:
    """Audit a transcript; the backend defaults to the one in its election config."""
    return Auditor(transcript, backend).run()
