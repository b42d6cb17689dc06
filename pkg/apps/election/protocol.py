"""
Election orchestration: setup, registration and voting for every role.
"""
import logging
from pathlib import Path

from apps.board.authorization import ANONYMOUS, AuthorRegistry
from apps.board.board import BulletinBoard
from apps.board.models import EntryKind, Transcript
from apps.core.drbg import Drbg
from apps.core.encoding import encode, hex_int, sha256
from apps.core.exceptions import ChoiceNotInSlateError, ConfigurationError, ElectionError
from apps.core.tracing import trace_phase
from apps.crypto import elgamal
from apps.crypto.group import GroupParams, generate_params
from apps.crypto.nizk import ProofContext, prove_ballot
from apps.crypto.threshold import TallierPanel
from apps.fhe.models import PlaintextTag
from apps.fhe.oracle import ApprovalPanel, FheOracle, credential_hash
from apps.mixnet.mix import MixServer
from apps.tally.runner import run_tally

from .models import (
    Backend,
    Ballot,
    BallotReceipt,
    CoercionOutcome,
    Credential,
    ElectionConfig,
    RollEntry,
    Voter,
)

logger = logging.getLogger(__name__)

AUTHORITY = "authority"
ORACLE = "oracle"
FORGED_CONTEXT_SUFFIX = b"/forged"


def registrar_name(index: int) -> str:
    return f"registrar-{index}"


def tallier_name(index: int) -> str:
    return f"tallier-{index}"


def mix_name(index: int) -> str:
    return f"mix-{index}"


def encode_candidates(params: GroupParams, candidates) -> tuple[int, ...]:
    """Hash each candidate name into the subgroup; encodings must be distinct."""
    slate = tuple(params.hash_to_group("candidate", name) for name in candidates)
    if len(set(slate)) != len(slate):
        raise ConfigurationError("Candidate encodings collide in this group", bits=params.p)
    return slate


class Election:
    """
    One election run: the board plus the simulated authorities that act on it.

    Secrets (tallier shares, the oracle, voter credentials) live on this
    object; everything a verifier needs is posted to the board.
    """

    def __init__(self, config: ElectionConfig, path: str | Path | None = None):
        if not config.candidates:
            raise ConfigurationError("At least one candidate is required")
        if config.eligibility and config.backend != Backend.LINEAR:
            raise ConfigurationError("Eligibility mode needs the linear backend")
        self.config = config
        self.ctx = ProofContext(election_id=config.election_id)
        self.rng = Drbg(encode("election", config.seed, config.election_id))
        self.registry = AuthorRegistry(sha256("board-authors", config.seed, config.election_id))
        self.board = BulletinBoard(self.registry, path)
        self.mix_servers = [MixServer(mix_name(i)) for i in range(config.mix_servers)]
        self.params: GroupParams | None = None
        self.public = None
        self.slate: tuple = ()
        self.talliers: TallierPanel | None = None
        self.oracle: FheOracle | None = None
        self.fhe_panel: ApprovalPanel | None = None
        self.voters: list[Voter] = []
        self.result = None
        self._keypair = None
        self._streams: dict[str, Drbg] = {}

    @property
    def is_classical(self) -> bool:
        return self.config.is_classical

    def _stream(self, name: str) -> Drbg:
        if name not in self._streams:
            self._streams[name] = self.rng.child(name)
        return self._streams[name]

    def authors(self) -> list[str]:
        config = self.config
        names = [AUTHORITY, ORACLE]
        names += [registrar_name(i) for i in range(config.registrars)]
        names += [tallier_name(i) for i in range(1, config.talliers + 1)]
        names += [server.name for server in self.mix_servers]
        return names

    def _require_setup(self) -> None:
        if self.talliers is None and self.oracle is None:
            raise ElectionError("Election has not been set up")

    # setup

    def setup(self) -> "Election":
        config = self.config
        with trace_phase("setup", election=config.election_id.hex(), backend=str(config.backend)):
            self.registry.enroll(*self.authors())
            self.board.append(
                EntryKind.PARAM,
                {"artifact": "authorities", "keys": self.registry.directory()},
                AUTHORITY,
            )
            if self.is_classical:
                self._setup_classical()
            else:
                self._setup_fhe()
        return self

    def _setup_classical(self) -> None:
        config = self.config
        self.params = generate_params(
            config.group_bits, sha256("group", config.seed, config.election_id)
        )
        self.slate = encode_candidates(self.params, config.candidates)
        self._keypair = elgamal.keygen(self.params, self.rng.child("tallier-key"))
        self.talliers = TallierPanel.from_keypair(
            self._keypair, config.threshold, config.talliers, self.rng.child("talliers")
        )
        self.public = self.talliers.public

        self.board.append(
            EntryKind.PARAM, {"artifact": "group", **self.params.to_dict()}, AUTHORITY
        )
        self._post_election_entry([hex_int(c) for c in self.slate])
        self.board.append(
            EntryKind.PARAM,
            {
                "artifact": "tallier-key",
                "h": hex_int(self.public.h),
                "t": config.threshold,
                "n": config.talliers,
                "commitments": {
                    str(index): hex_int(value)
                    for index, value in sorted(self.talliers.commitments.items())
                },
            },
            AUTHORITY,
        )

    def _setup_fhe(self) -> None:
        config = self.config
        self.oracle = FheOracle(sha256("fhe-oracle", config.seed, config.election_id))
        public_key, shares = self.oracle.fhe_keygen(config.threshold, config.talliers)
        self.fhe_panel = ApprovalPanel(public_key, shares)
        self.slate = tuple(config.candidates)
        self._post_election_entry(list(config.candidates))
        self.board.append(
            EntryKind.PARAM, {"artifact": "fhe-key", **public_key.to_dict()}, ORACLE
        )

    def _post_election_entry(self, slate) -> None:
        self.board.append(
            EntryKind.PARAM,
            {"artifact": "election", "config": self.config.public_dict(), "slate": slate},
            AUTHORITY,
        )

    # registration

    def new_credential(self, rng: Drbg | None = None) -> Credential:
        """Uniform credential; a coerced voter's fake one comes from here too."""
        rng = rng or self._stream("credentials")
        if self.is_classical:
            return Credential(sigma=self.params.random_element(rng))
        if self.config.eligibility:
            preimage = rng.randbytes(32)
            return Credential(sigma=credential_hash(preimage), preimage=preimage)
        return Credential(sigma=rng.randbytes(32))

    def fake_credential(self) -> Credential:
        """What a coerced voter hands over; drawn exactly like a real credential."""
        return self.new_credential(self._stream("fake-credentials"))

    def encrypt_credential(self, sigma, rng: Drbg | None = None):
        rng = rng or self._stream("credential-encryption")
        if self.is_classical:
            return elgamal.encrypt(self.public, sigma, self.params.random_scalar(rng))
        return self.oracle.encrypt(sigma, PlaintextTag.CREDENTIAL)

    def register(self, voter_count: int) -> list[Voter]:
        """
        Post one roll entry per voter, rotating over registrars. Credentials
        are handed back to the simulated voters only.
        """
        self._require_setup()
        registered = []
        with trace_phase("registration", voters=voter_count):
            for _ in range(voter_count):
                index = len(self.voters)
                credential = self.new_credential()
                registrar = registrar_name(index % self.config.registrars)
                entry = self.board.append(
                    EntryKind.ROLL,
                    RollEntry(index, self.encrypt_credential(credential.sigma)).to_payload(),
                    registrar,
                )
                voter = Voter(index, credential, registrar, entry.index)
                self.voters.append(voter)
                registered.append(voter)
        return registered

    # voting

    def build_ballot(
        self,
        credential: Credential,
        choice: str,
        election_id: bytes | None = None,
        preimage: bytes | None = None,
    ) -> Ballot:
        if choice not in self.config.candidates:
            raise ChoiceNotInSlateError(choice=choice)
        self._require_setup()
        election_id = election_id or self.config.election_id
        rng = self._stream("ballots")

        if self.is_classical:
            j = self.config.candidates.index(choice)
            vote_r = self.params.random_scalar(rng)
            credential_r = self.params.random_scalar(rng)
            vote = elgamal.encrypt(self.public, self.slate[j], vote_r)
            credential_ct = elgamal.encrypt(self.public, credential.sigma, credential_r)
            proof = prove_ballot(
                self.public,
                vote,
                credential_ct,
                self.slate,
                j,
                vote_r,
                credential_r,
                ProofContext(election_id=election_id),
                rng,
            )
            return Ballot(vote=vote, credential=credential_ct, proof=proof)

        vote = self.oracle.encrypt(choice.encode("utf-8"), PlaintextTag.VOTE)
        credential_ct = self.oracle.encrypt(credential.sigma, PlaintextTag.CREDENTIAL)
        preimage_ct = None
        if self.config.eligibility:
            x = preimage if preimage is not None else credential.preimage
            preimage_ct = self.oracle.encrypt(x or b"", PlaintextTag.PREIMAGE)
        ciphertexts = [vote, credential_ct] + ([preimage_ct] if preimage_ct else [])
        proof = self.oracle.attest_ballot(election_id, *ciphertexts)
        return Ballot(vote=vote, credential=credential_ct, proof=proof, preimage=preimage_ct)

    def post_ballot(self, ballot: Ballot) -> BallotReceipt:
        entry = self.board.append(EntryKind.BALLOT, ballot.to_payload(), ANONYMOUS)
        return BallotReceipt(
            index=entry.index,
            entry_hash=entry.entry_hash,
            payload_digest=sha256(entry.payload).hex(),
        )

    def cast_vote(
        self, credential: Credential, choice: str, election_id: bytes | None = None
    ) -> BallotReceipt:
        """Post a ballot anonymously; a foreign ``election_id`` yields invalid proofs here."""
        return self.post_ballot(self.build_ballot(credential, choice, election_id))

    def cast_invalid_proof(self, credential: Credential, choice: str) -> BallotReceipt:
        return self.cast_vote(
            credential, choice, election_id=self.config.election_id + FORGED_CONTEXT_SUFFIX
        )

    def cast_coerced(self, voter: Voter, coercer_choice: str, real_choice: str) -> CoercionOutcome:
        """
        Hand the coercer a fresh fake credential, vote with it as instructed,
        then cast the real vote with the true credential.
        """
        fake = self.fake_credential()
        fake_receipt = self.cast_vote(fake, coercer_choice)
        real_receipt = self.cast_vote(voter.credential, real_choice)
        return CoercionOutcome(
            voter=voter,
            fake_credential=fake,
            fake_receipt=fake_receipt,
            real_receipt=real_receipt,
            coercer_choice=coercer_choice,
            real_choice=real_choice,
        )

    def cast_stuffed(self, voter: Voter, choice: str) -> BallotReceipt:
        """A malicious authority votes with a registered credential but no valid preimage."""
        if not self.config.eligibility:
            raise ConfigurationError("Stuffing is only modelled in eligibility mode")
        return self.post_ballot(self.build_ballot(voter.credential, choice, preimage=bytes(32)))

    # tallying

    def tally(self):
        self.result = run_tally(self)
        return self.result

    def open_ciphertext(self, ct):
        """Decrypt with authority secrets; used by ground-truth checks and tests."""
        if self.is_classical:
            return elgamal.decrypt(self._keypair, ct)
        return self.oracle.threshold_decrypt(ct, self.fhe_panel.approvals(ct)).plaintext

    def transcript(self) -> Transcript:
        return self.board.transcript()


def verify_recorded(board: BulletinBoard | Transcript, receipt: BallotReceipt) -> bool:
    """A voter's check that their ballot sits on the board unchanged."""
    entries = board.entries
    if not 0 <= receipt.index < len(entries):
        return False
    entry = entries[receipt.index]
    return (
        entry.kind == EntryKind.BALLOT
        and entry.entry_hash == receipt.entry_hash
        and sha256(entry.payload).hex() == receipt.payload_digest
    )
