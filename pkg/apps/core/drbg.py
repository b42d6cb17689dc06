"""
Deterministic random source for reproducible elections.
"""
import hashlib
import random


class Drbg(random.Random):
    """
    SHA-256 counter-mode generator behind the ``random.Random`` interface.

    Every election derives all of its randomness from one seed through
    labelled child streams, so two runs with the same seed produce
    byte-identical transcripts.
    """

    def __init__(self, seed: bytes | str | int = b""):
        self._key = b""
        self._counter = 0
        self._buffer = b""
        super().__init__(seed)

    def seed(self, a=None, version=2):
        if a is None:
            a = b""
        if isinstance(a, int):
            a = a.to_bytes(max(1, (a.bit_length() + 7) // 8), "big")
        if isinstance(a, str):
            a = a.encode("utf-8")
        self._key = hashlib.sha256(b"drbg-seed" + bytes(a)).digest()
        self._counter = 0
        self._buffer = b""
        self.gauss_next = None

    def _take(self, count: int) -> bytes:
        while len(self._buffer) < count:
            block = hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:count], self._buffer[count:]
        return out

    def getrandbits(self, k: int) -> int:
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        if k == 0:
            return 0
        size = (k + 7) // 8
        value = int.from_bytes(self._take(size), "big")
        return value >> (size * 8 - k)

    def random(self) -> float:
        return self.getrandbits(53) * 2.0**-53

    def randbytes(self, n: int) -> bytes:
        return self._take(n)

    def getstate(self):
        return (self._key, self._counter, self._buffer)

    def setstate(self, state):
        self._key, self._counter, self._buffer = state

    def child(self, label: str) -> "Drbg":
        """Independent stream for one purpose; does not advance this one."""
        return Drbg(hashlib.sha256(self._key + b"/" + label.encode("utf-8")).digest())

    def scalar(self, q: int) -> int:
        """Uniform non-zero scalar in Z_q."""
        return self.randrange(1, q)
