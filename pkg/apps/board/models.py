"""
Bulletin board entries and transcripts.
"""
import base64
import json
from dataclasses import dataclass, field

from django.db import models

from apps.core.encoding import sha256

GENESIS_HASH = "00" * 32


class EntryKind(models.TextChoices):
    """What a board entry records."""

    PARAM = "param", "Public parameter"
    ROLL = "roll", "Voter roll entry"
    BALLOT = "ballot", "Ballot"
    PET = "pet", "Plaintext equivalence test"
    MIX = "mix", "Mix batch"
    HASH_POST = "hash-post", "Keyed hash or blinded credential"
    DECRYPTION = "decryption", "Decryption"
    RESULT = "result", "Tally result"


class AuthorRole(models.TextChoices):
    AUTHORITY = "authority", "Election authority"
    REGISTRAR = "registrar", "Registrar"
    TALLIER = "tallier", "Tallier"
    MIX_SERVER = "mix", "Mix server"
    ORACLE = "oracle", "FHE oracle"
    ANONYMOUS = "anonymous", "Anonymous voter"


@dataclass(frozen=True)
class BoardEntry:
    """
    One chained board record.

    entry_hash = H(prev_hash || index || kind || payload) over the canonical
    encoding; the author's signature covers entry_hash. Anonymous entries
    carry an empty signature.
    """

    index: int
    kind: str
    payload: bytes
    prev_hash: str
    entry_hash: str
    author: str
    signature: str = ""

    @staticmethod
    def compute_hash(prev_hash: str, index: int, kind: str, payload: bytes) -> str:
        return sha256(bytes.fromhex(prev_hash), index, str(kind), payload).hex()

    @property
    def data(self):
        return json.loads(self.payload)

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "kind": str(self.kind),
            "payload": base64.b64encode(self.payload).decode("ascii"),
            "prev_hash": self.prev_hash,
            "entry_hash": self.entry_hash,
            "author": self.author,
            "signature": self.signature,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_record(cls, record: dict) -> "BoardEntry":
        return cls(
            index=int(record["index"]),
            kind=str(record["kind"]),
            payload=base64.b64decode(record["payload"]),
            prev_hash=record["prev_hash"],
            entry_hash=record["entry_hash"],
            author=record["author"],
            signature=record.get("signature", ""),
        )


@dataclass(frozen=True)
class Transcript:
    """Ordered entries of one election plus the author key directory."""

    entries: tuple[BoardEntry, ...]
    keys: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def query(self, kind) -> list[BoardEntry]:
        return [entry for entry in self.entries if entry.kind == kind]

    def params_entry(self, artifact: str) -> BoardEntry | None:
        for entry in self.query(EntryKind.PARAM):
            if entry.data.get("artifact") == artifact:
                return entry
        return None

    def directory(self) -> dict[str, str]:
        """Public keys by author; falls back to the posted authorities entry."""
        if self.keys:
            return dict(self.keys)
        entry = self.params_entry("authorities")
        return dict(entry.data.get("keys", {})) if entry else {}

    def to_bytes(self) -> bytes:
        return "".join(entry.to_json_line() + "\n" for entry in self.entries).encode("utf-8")

    def with_entries(self, entries) -> "Transcript":
        return Transcript(entries=tuple(entries), keys=self.keys)
