"""
Append-only, hash-chained bulletin board with JSON Lines persistence.
"""
import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from apps.core.encoding import canonical_json
from apps.core.exceptions import PersistenceError, TranscriptNotFoundError

from .authorization import AuthorRegistry, authorize, verify_signature
from .models import GENESIS_HASH, BoardEntry, EntryKind, Transcript
from .serializers import BoardEntrySerializer

logger = logging.getLogger(__name__)


class BulletinBoard:
    """
    Single-writer board. Appends are serialized by a lock and each entry is
    written to disk (when a path is set) before ``append`` returns; readers
    get snapshots.
    """

    def __init__(self, registry: AuthorRegistry, path: str | Path | None = None):
        self.registry = registry
        self.path = Path(path) if path else None
        self._entries: list[BoardEntry] = []
        self._lock = threading.Lock()
        if self.path is not None:
            self._open_file()

    def _open_file(self) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_bytes(b"")
        except OSError as exc:
            raise PersistenceError(path=str(self.path), reason=str(exc)) from exc

    def _persist(self, entry: BoardEntry) -> None:
        if self.path is None:
            return
        try:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(entry.to_json_line() + "\n")
        except OSError as exc:
            raise PersistenceError(path=str(self.path), index=entry.index) from exc

    def append(self, kind, payload, author: str) -> BoardEntry:
        kind = EntryKind(kind)
        authorize(kind, author)
        if not isinstance(payload, bytes):
            payload = canonical_json(payload)

        with self._lock:
            index = len(self._entries)
            prev_hash = self._entries[-1].entry_hash if self._entries else GENESIS_HASH
            entry_hash = BoardEntry.compute_hash(prev_hash, index, kind.value, payload)
            entry = BoardEntry(
                index=index,
                kind=kind.value,
                payload=payload,
                prev_hash=prev_hash,
                entry_hash=entry_hash,
                author=author,
                signature=self.registry.sign(author, bytes.fromhex(entry_hash)),
            )
            self._persist(entry)
            self._entries.append(entry)

        logger.debug(
            f"Board entry {index} ({kind.value}) from {author}",
            extra={"index": index, "kind": kind.value, "author": author},
        )
        return entry

    def query(self, kind) -> list[BoardEntry]:
        return [entry for entry in self.entries if entry.kind == kind]

    @property
    def entries(self) -> tuple[BoardEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def transcript(self) -> Transcript:
        return Transcript(entries=self.entries, keys=self.registry.directory())

    def save(self, path: str | Path) -> None:
        save_transcript(self.transcript(), path)


def save_transcript(transcript: Transcript, path: str | Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(transcript.to_bytes())
    except OSError as exc:
        raise PersistenceError(path=str(path), reason=str(exc)) from exc


def load_transcript(path: str | Path) -> Transcript:
    """Read a JSON Lines transcript; keys come from the posted authorities entry."""
    path = Path(path)
    if not path.is_file():
        raise TranscriptNotFoundError(path=str(path))

    entries = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PersistenceError("Transcript line is not JSON", line=number) from exc
        serializer = BoardEntrySerializer(data=record)
        if not serializer.is_valid():
            raise PersistenceError(
                "Transcript line is malformed", line=number, errors=serializer.errors
            )
        entries.append(serializer.to_entry())
    return Transcript(entries=tuple(entries))


@dataclass(frozen=True)
class ChainVerdict:
    ok: bool
    failed_index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_chain(transcript: Transcript, directory: dict[str, str] | None = None) -> ChainVerdict:
    """
    Recompute every hash, check index contiguity and every signature.

    A truncated transcript is still a valid prefix; truncation is caught by
    the length attestation in the result entry.
    """
    directory = directory if directory is not None else transcript.directory()
    prev_hash = GENESIS_HASH
    for position, entry in enumerate(transcript.entries):
        if entry.index != position:
            return ChainVerdict(False, position, "index gap")
        if entry.prev_hash != prev_hash:
            return ChainVerdict(False, position, "broken link")
        if entry.entry_hash != BoardEntry.compute_hash(
            entry.prev_hash, entry.index, entry.kind, entry.payload
        ):
            return ChainVerdict(False, position, "hash mismatch")
        if not verify_signature(
            directory, entry.author, bytes.fromhex(entry.entry_hash), entry.signature
        ):
            return ChainVerdict(False, position, "bad signature")
        prev_hash = entry.entry_hash
    return ChainVerdict(True)


def check_length_attestation(transcript: Transcript) -> bool:
    """The final entry is a result that records the full board length."""
    if not transcript.entries:
        return False
    last = transcript.entries[-1]
    if last.kind != EntryKind.RESULT:
        return False
    try:
        return int(last.data.get("board_length", -1)) == len(transcript.entries)
    except (ValueError, AttributeError):
        return False
