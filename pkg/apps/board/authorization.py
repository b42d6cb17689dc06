"""
Author identities, signing keys and the kind/author posting policy.
"""
import logging
import re

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from apps.core.encoding import sha256
from apps.core.exceptions import UnauthorizedAuthorError

from .models import AuthorRole, EntryKind

logger = logging.getLogger(__name__)

ANONYMOUS = AuthorRole.ANONYMOUS.value

_AUTHOR_PATTERN = re.compile(r"^(?P<role>[a-z]+)(?:-(?P<index>\d+))?$")

ALLOWED_ROLES: dict[str, frozenset[str]] = {
    EntryKind.PARAM: frozenset({AuthorRole.AUTHORITY, AuthorRole.ORACLE}),
    EntryKind.ROLL: frozenset({AuthorRole.REGISTRAR}),
    EntryKind.BALLOT: frozenset({AuthorRole.ANONYMOUS}),
    EntryKind.PET: frozenset({AuthorRole.TALLIER}),
    EntryKind.MIX: frozenset({AuthorRole.MIX_SERVER}),
    EntryKind.HASH_POST: frozenset({AuthorRole.TALLIER, AuthorRole.ORACLE}),
    EntryKind.DECRYPTION: frozenset({AuthorRole.TALLIER, AuthorRole.ORACLE}),
    EntryKind.RESULT: frozenset({AuthorRole.TALLIER}),
}


def role_of(author: str) -> str:
    match = _AUTHOR_PATTERN.match(author or "")
    if not match or match.group("role") not in AuthorRole.values:
        raise UnauthorizedAuthorError("Unknown author identity", author=author)
    return match.group("role")


def authorize(kind: str, author: str) -> None:
    role = role_of(author)
    if role not in ALLOWED_ROLES.get(kind, frozenset()):
        logger.warning(
            f"Rejected {kind} entry from {author}", extra={"kind": kind, "author": author}
        )
        raise UnauthorizedAuthorError(kind=kind, author=author)


class AuthorRegistry:
    """
    Ed25519 signing keys for every non-anonymous author, derived from the
    election seed so a rerun signs identically.
    """

    def __init__(self, seed: bytes):
        self._seed = seed
        self._keys: dict[str, Ed25519PrivateKey] = {}

    def _key(self, author: str) -> Ed25519PrivateKey:
        key = self._keys.get(author)
        if key is None:
            key = Ed25519PrivateKey.from_private_bytes(sha256("author-key", self._seed, author))
            self._keys[author] = key
        return key

    def sign(self, author: str, message: bytes) -> str:
        if role_of(author) == ANONYMOUS:
            return ""
        return self._key(author).sign(message).hex()

    def public_key(self, author: str) -> str:
        raw = self._key(author).public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return raw.hex()

    def enroll(self, *authors: str) -> None:
        for author in authors:
            self._key(author)

    def directory(self) -> dict[str, str]:
        return {author: self.public_key(author) for author in sorted(self._keys)}


def verify_signature(
    directory: dict[str, str], author: str, message: bytes, signature: str
) -> bool:
    """Anonymous entries must be unsigned; everyone else must verify."""
    try:
        role = role_of(author)
    except UnauthorizedAuthorError:
        return False
    if role == ANONYMOUS:
        return signature == ""
    public_hex = directory.get(author)
    if not public_hex or not signature:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_hex)).verify(
            bytes.fromhex(signature), message
        )
    except (InvalidSignature, ValueError):
        return False
    return True
