"""
Canonical byte encoding shared by every hash in the system.

Integers are big-endian, minimal length (zero encodes as no bytes); every
item is prefixed by its 4-byte length. Sequences are prefixed by their item
count. Fiat-Shamir challenges and board chaining both hash this encoding, so
it must not change.
"""
import hashlib
import json
from collections.abc import Iterable


def int_to_bytes(value: int) -> bytes:
    """Big-endian minimal-length magnitude of a non-negative integer."""
    value = int(value)
    if value < 0:
        raise ValueError("canonical encoding is defined for non-negative integers")
    return value.to_bytes((value.bit_length() + 7) // 8, "big")


def _prefixed(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def encode(*parts) -> bytes:
    """Length-prefixed concatenation of ints, bytes, strings and sequences."""
    out = bytearray()
    for part in parts:
        if isinstance(part, bool):
            out += _prefixed(b"\x01" if part else b"\x00")
        elif isinstance(part, (bytes, bytearray)):
            out += _prefixed(bytes(part))
        elif isinstance(part, str):
            out += _prefixed(part.encode("utf-8"))
        elif isinstance(part, Iterable):
            items = list(part)
            out += _prefixed(int_to_bytes(len(items)))
            out += encode(*items)
        else:
            out += _prefixed(int_to_bytes(part))
    return bytes(out)


def sha256(*parts) -> bytes:
    return hashlib.sha256(encode(*parts)).digest()


def hash_to_scalar(modulus: int, tag: str, *parts) -> int:
    """Domain-separated hash of the canonical encoding, reduced mod ``modulus``."""
    return int.from_bytes(sha256(tag, *parts), "big") % modulus


def hex_int(value: int) -> str:
    return format(int(value), "x")


def parse_hex_int(value: str) -> int:
    return int(value, 16)


def canonical_json(data) -> bytes:
    """Sorted-key compact JSON; the payload format posted on the board."""
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")
