"""
Ciphertexts, keys and evidence records of the ideal threshold-FHE oracle.
"""
import base64
from dataclasses import asdict, dataclass, field

from django.db import models

from apps.core.encoding import canonical_json, sha256


class PlaintextTag(models.TextChoices):
    """Plaintext space a ciphertext belongs to."""

    CREDENTIAL = "credential", "Credential"
    VOTE = "vote", "Vote"
    HASH_DIGEST = "hash-digest", "Keyed hash digest"
    PREIMAGE = "preimage", "Credential preimage"
    KEY = "key", "Hash key"
    BOOLEAN = "boolean", "Boolean"


class OracleOperation(models.TextChoices):
    ENCRYPT = "encrypt", "Encrypt"
    RERANDOMIZE = "rerandomize", "Re-randomize"
    KEYED_HASH = "keyed-hash", "Keyed hash"
    PREIMAGE_EQ = "preimage-eq", "Hash-of-preimage equality"
    DECRYPT = "decrypt", "Threshold decrypt"
    BALLOT = "ballot", "Ballot attestation"
    LINK = "link", "Re-randomization link"


@dataclass(frozen=True)
class FheCiphertext:
    """
    Opaque bytes. Plaintext equality is not decidable from the bytes, and
    every re-randomization produces fresh bytes and bumps ``generation``.
    """

    data: bytes
    tag: str
    generation: int = 0

    @property
    def digest(self) -> str:
        return sha256("fhe-ciphertext", self.tag, self.data).hex()

    def to_dict(self) -> dict:
        return {
            "data": base64.b64encode(self.data).decode("ascii"),
            "tag": str(self.tag),
            "generation": self.generation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FheCiphertext":
        return cls(
            data=base64.b64decode(data["data"]),
            tag=str(data["tag"]),
            generation=int(data.get("generation", 0)),
        )


@dataclass(frozen=True)
class FhePublicKey:
    key_id: str
    t: int
    n: int
    verify_key: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FhePublicKey":
        return cls(
            key_id=data["key_id"], t=int(data["t"]), n=int(data["n"]), verify_key=data["verify_key"]
        )


@dataclass(frozen=True)
class Approval:
    index: int
    mac: str


@dataclass(frozen=True)
class HashKey:
    key_id: str
    encrypted: FheCiphertext

    def to_dict(self) -> dict:
        return {"key_id": self.key_id, "encrypted": self.encrypted.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "HashKey":
        return cls(key_id=data["key_id"], encrypted=FheCiphertext.from_dict(data["encrypted"]))


@dataclass(frozen=True)
class OracleRecord:
    """
    One logged oracle evaluation or decryption, signed by the oracle.

    ``commitment`` commits to the revealed plaintext for decryptions and is
    empty otherwise; ``link`` points at an earlier decryption of the same
    input.
    """

    seq: int
    operation: str
    inputs: tuple[str, ...]
    output: str
    context: str = ""
    approvals: tuple[int, ...] = field(default_factory=tuple)
    commitment: str = ""
    link: int | None = None
    signature: str = ""

    def message(self) -> bytes:
        body = self.to_dict()
        body.pop("signature")
        return canonical_json(body)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "operation": str(self.operation),
            "inputs": list(self.inputs),
            "output": self.output,
            "context": self.context,
            "approvals": list(self.approvals),
            "commitment": self.commitment,
            "link": self.link,
            "signature": self.signature,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OracleRecord":
        return cls(
            seq=int(data["seq"]),
            operation=str(data["operation"]),
            inputs=tuple(data["inputs"]),
            output=data["output"],
            context=data.get("context", ""),
            approvals=tuple(int(a) for a in data.get("approvals", ())),
            commitment=data.get("commitment", ""),
            link=data.get("link"),
            signature=data.get("signature", ""),
        )


@dataclass(frozen=True)
class DecryptionResult:
    plaintext: bytes
    record: OracleRecord


def plaintext_commitment(plaintext: bytes) -> str:
    return sha256("fhe-plaintext", plaintext).hex()
