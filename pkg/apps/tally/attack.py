"""
Exponent probe against published blinded credentials.

A coercer holding a credential it suspects is fake casts two ballots: one
with the credential and one with the credential raised to a known w. If the
tally publishes sigma^z for every ballot and roll entry, the pair (b, b^w)
identifies the coercer's ballots, and b's presence among the blinded roll
values tells whether the credential is registered.
"""
import logging
from dataclasses import dataclass

from django.db import models

from apps.board.models import EntryKind, Transcript
from apps.core.encoding import parse_hex_int
from apps.core.exceptions import ConfigurationError
from apps.election.models import Backend, BallotReceipt, Credential, ElectionConfig
from apps.election.protocol import Election

logger = logging.getLogger(__name__)

DIGEST_SPACE_BITS = 256


class ProbeVerdict(models.TextChoices):
    REGISTERED = "registered", "Credential is registered"
    NOT_REGISTERED = "not_registered", "Credential is not registered"
    INCONCLUSIVE = "inconclusive", "No related pair found"
    NOT_APPLICABLE = "not_applicable", "Backend publishes no blinded values"


@dataclass(frozen=True)
class Probe:
    credential: Credential
    exponent: int
    receipts: tuple[BallotReceipt, ...]


@dataclass(frozen=True)
class ProbeOutcome:
    verdict: str
    pairs_found: int = 0
    scanned: int = 0

    @property
    def claims_registered(self) -> bool:
        return self.verdict == ProbeVerdict.REGISTERED

    def to_dict(self) -> dict:
        return {
            "verdict": str(self.verdict),
            "pairs_found": self.pairs_found,
            "scanned": self.scanned,
        }


def raised_credential(election, credential: Credential, w: int) -> Credential:
    """sigma^w in the credential space of the election."""
    if election.is_classical:
        return Credential(sigma=election.params.exp(credential.sigma, w))
    modulus = 1 << DIGEST_SPACE_BITS
    value = pow(int.from_bytes(credential.sigma, "big"), w, modulus)
    return Credential(sigma=value.to_bytes(DIGEST_SPACE_BITS // 8, "big"))


def plant_probe(
    election, credential: Credential, w: int | None = None, choice: str | None = None
) -> Probe:
    """Cast the probe ballot pair with the coercer's credential."""
    rng = election.rng.child(f"probe/{credential.key}")
    if w is None:
        bound = election.params.q if election.is_classical else 1 << 16
        w = rng.randrange(2, bound)
    choice = choice or election.config.candidates[0]
    receipts = (
        election.cast_vote(credential, choice),
        election.cast_vote(raised_credential(election, credential, w), choice),
    )
    logger.info("Probe ballots cast", extra={"indices": [r.index for r in receipts]})
    return Probe(credential=credential, exponent=w, receipts=receipts)


def _related_pairs(values: list[int], raise_to) -> list[int]:
    present = set(values)
    return [value for value in values if raise_to(value) != value and raise_to(value) in present]


def conclude_probe(transcript: Transcript, probe: Probe) -> ProbeOutcome:
    """Read the published weeding evidence and decide what it reveals."""
    election = transcript.params_entry("election")
    config = ElectionConfig.from_public(election.data["config"])

    if config.backend == Backend.QUADRATIC:
        return ProbeOutcome(verdict=ProbeVerdict.NOT_APPLICABLE)

    entries = [
        entry
        for entry in transcript.query(EntryKind.HASH_POST)
        if entry.data.get("stage") == "roll"
    ]
    if config.backend == Backend.SMITH_WEBER:
        if not entries:
            return ProbeOutcome(verdict=ProbeVerdict.INCONCLUSIVE)
        group = transcript.params_entry("group").data
        p, q = parse_hex_int(group["p"]), parse_hex_int(group["q"])
        data = entries[0].data
        ballots = [parse_hex_int(row["value"]) for row in data["ballots"]]
        roll = {parse_hex_int(row["value"]) for row in data["roll"]}

        def raise_to(value):
            return pow(value, probe.exponent % q, p)

    else:
        ballots = [
            int.from_bytes(bytes.fromhex(entry.data["value"]), "big")
            for entry in entries
            if entry.data["side"] == "ballots"
        ]
        roll = {
            int.from_bytes(bytes.fromhex(entry.data["value"]), "big")
            for entry in entries
            if entry.data["side"] == "roll"
        }
        digest_bits = 4 * len(entries[0].data["value"]) if entries else 0
        modulus = 1 << digest_bits

        def raise_to(value):
            return pow(value, probe.exponent, modulus)

    candidates = _related_pairs(ballots, raise_to)
    if not candidates:
        return ProbeOutcome(verdict=ProbeVerdict.INCONCLUSIVE, scanned=len(ballots))
    verdict = (
        ProbeVerdict.REGISTERED
        if any(value in roll for value in candidates)
        else ProbeVerdict.NOT_REGISTERED
    )
    return ProbeOutcome(verdict=verdict, pairs_found=len(candidates), scanned=len(ballots))


def exponent_probe_attack(election, credential: Credential, w: int | None = None) -> ProbeOutcome:
    """Plant a probe, run the tally and read the verdict off the board."""
    probe = plant_probe(election, credential, w)
    election.tally()
    return conclude_probe(election.transcript(), probe)


def run_attack_demo(config: ElectionConfig, voters: int = 6) -> dict:
    """
    One election with two probes: the coercer tries a voter's real
    credential and the fake credential another voter handed over.
    """
    if voters < 2:
        raise ConfigurationError("The demo needs at least two voters", voters=voters)
    election = Election(config).setup()
    roster = election.register(voters)
    candidates = config.candidates
    for voter in roster[2:]:
        election.cast_vote(voter.credential, candidates[voter.index % len(candidates)])
    coercion = election.cast_coerced(roster[1], candidates[0], candidates[-1])

    real = plant_probe(election, roster[0].credential)
    fake = plant_probe(election, coercion.fake_credential)
    result = election.tally()
    transcript = election.transcript()
    outcomes = {"real": conclude_probe(transcript, real), "fake": conclude_probe(transcript, fake)}
    for name, outcome in outcomes.items():
        logger.info(
            f"Probe on the {name} credential: {outcome.verdict}",
            extra={"backend": str(config.backend), "probe": name, "verdict": str(outcome.verdict)},
        )
    return {
        "backend": str(config.backend),
        "real": outcomes["real"].to_dict(),
        "fake": outcomes["fake"].to_dict(),
        "counts": result.counts,
    }
