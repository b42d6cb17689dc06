"""
Election configuration, credentials, roll entries and ballots.
"""
from dataclasses import asdict, dataclass, replace

from django.conf import settings
from django.db import models

from apps.core.encoding import sha256
from apps.crypto.elgamal import ElGamalCiphertext
from apps.crypto.nizk import BallotProofBundle
from apps.fhe.models import FheCiphertext, OracleRecord


class Backend(models.TextChoices):
    """Tallying backend."""

    QUADRATIC = "quadratic", "Pairwise PET weeding"
    LINEAR = "linear", "Homomorphic keyed-hash weeding"
    SMITH_WEBER = "smith_weber", "Blinded-exponent weeding"


class DuplicatePolicy(models.TextChoices):
    KEEP_FIRST = "keep_first", "Keep first posted"
    KEEP_LAST = "keep_last", "Keep last posted"


@dataclass(frozen=True)
class ElectionConfig:
    election_id: bytes
    candidates: tuple[str, ...]
    threshold: int = 2
    talliers: int = 3
    registrars: int = 2
    backend: str = Backend.QUADRATIC
    duplicate_policy: str = DuplicatePolicy.KEEP_LAST
    seed: bytes = b""
    eligibility: bool = False
    group_bits: int = 64
    mix_servers: int = 2
    shadow_rounds: int = 16
    canonical_counts: bool = True

    @property
    def is_classical(self) -> bool:
        return self.backend != Backend.LINEAR

    @classmethod
    def from_settings(cls, **overrides) -> "ElectionConfig":
        """Project defaults from ``ELECTION_DEFAULTS`` with per-call overrides."""
        values = dict(settings.ELECTION_DEFAULTS)
        values.update(overrides)
        values["candidates"] = tuple(values["candidates"])
        for name in ("election_id", "seed"):
            value = values.get(name, b"")
            values[name] = value.encode("utf-8") if isinstance(value, str) else value
        known = cls.__dataclass_fields__
        return cls(**{key: value for key, value in values.items() if key in known})

    def with_backend(self, backend: str) -> "ElectionConfig":
        return replace(self, backend=backend)

    def public_dict(self) -> dict:
        """Config as posted on the board; the seed stays private."""
        data = asdict(self)
        data.pop("seed")
        data["election_id"] = self.election_id.hex()
        data["candidates"] = list(self.candidates)
        data["backend"] = str(self.backend)
        data["duplicate_policy"] = str(self.duplicate_policy)
        return data

    @classmethod
    def from_public(cls, data: dict) -> "ElectionConfig":
        values = dict(data)
        values["election_id"] = bytes.fromhex(values["election_id"])
        values["candidates"] = tuple(values["candidates"])
        known = cls.__dataclass_fields__
        return cls(**{key: value for key, value in values.items() if key in known})


@dataclass(frozen=True)
class Credential:
    """
    sigma is a group element for classical elections and 32 bytes on the FHE
    path; eligibility mode keeps the preimage x with sigma = H(x).
    """

    sigma: int | bytes
    preimage: bytes | None = None

    @property
    def key(self) -> str:
        value = self.sigma if isinstance(self.sigma, bytes) else str(self.sigma).encode()
        return sha256("credential-key", value).hex()


@dataclass
class Voter:
    index: int
    credential: Credential
    registrar: str = ""
    roll_index: int | None = None


@dataclass(frozen=True)
class RollEntry:
    voter: int
    ciphertext: ElGamalCiphertext | FheCiphertext

    def to_payload(self) -> dict:
        return {"voter": self.voter, "ciphertext": dump_ciphertext(self.ciphertext)}

    @classmethod
    def from_payload(cls, data: dict) -> "RollEntry":
        return cls(voter=int(data["voter"]), ciphertext=load_ciphertext(data["ciphertext"]))


@dataclass(frozen=True)
class Ballot:
    """
    (E1, E2, P_f): vote and credential ciphertexts with a proof bundle on the
    classical path or an oracle attestation on the FHE path. Eligibility mode
    adds E(x).
    """

    vote: ElGamalCiphertext | FheCiphertext
    credential: ElGamalCiphertext | FheCiphertext
    proof: BallotProofBundle | OracleRecord | None
    preimage: FheCiphertext | None = None

    def to_payload(self) -> dict:
        return {
            "vote": dump_ciphertext(self.vote),
            "credential": dump_ciphertext(self.credential),
            "proof": self.proof.to_dict() if self.proof is not None else None,
            "preimage": self.preimage.to_dict() if self.preimage is not None else None,
        }

    @classmethod
    def from_payload(cls, data: dict) -> "Ballot":
        vote = load_ciphertext(data["vote"])
        proof = data.get("proof")
        if proof is not None:
            if isinstance(vote, ElGamalCiphertext):
                proof = BallotProofBundle.from_dict(proof)
            else:
                proof = OracleRecord.from_dict(proof)
        preimage = data.get("preimage")
        return cls(
            vote=vote,
            credential=load_ciphertext(data["credential"]),
            proof=proof,
            preimage=FheCiphertext.from_dict(preimage) if preimage else None,
        )


@dataclass(frozen=True)
class BallotReceipt:
    """What a voter keeps to check the board later."""

    index: int
    entry_hash: str
    payload_digest: str


@dataclass
class CoercionOutcome:
    voter: Voter
    fake_credential: Credential
    fake_receipt: BallotReceipt
    real_receipt: BallotReceipt
    coercer_choice: str
    real_choice: str


@dataclass
class CastRecord:
    """Plaintext bookkeeping for one posted ballot."""

    board_index: int
    credential_key: str
    choice: str
    proof_valid: bool = True
    registered: bool = True
    eligible: bool = True
    label: str = "honest"


def dump_ciphertext(ct):
    if isinstance(ct, ElGamalCiphertext):
        return ct.to_list()
    return ct.to_dict()


def load_ciphertext(data):
    if isinstance(data, list):
        return ElGamalCiphertext.from_list(data)
    return FheCiphertext.from_dict(data)
