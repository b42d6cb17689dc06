"""
Prime-order subgroup of a safe-prime field and its public parameters.
"""
import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

import gmpy2

from apps.core.drbg import Drbg
from apps.core.encoding import encode, hex_int, parse_hex_int, sha256
from apps.core.exceptions import InvalidGroupError, ParameterSearchError

logger = logging.getLogger(__name__)

MIN_BIT_LENGTH = 16

# RFC 3526 2048-bit MODP prime; p = 2q + 1 with q prime
MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)

STANDARD_PRIMES = {2048: MODP_2048}


@dataclass
class ExponentiationMeter:
    count: int = 0


_meter: ContextVar[ExponentiationMeter | None] = ContextVar("exponentiation_meter", default=None)


@contextmanager
def metering():
    """Count every group exponentiation performed inside the block."""
    meter = ExponentiationMeter()
    token = _meter.set(meter)
    try:
        yield meter
    finally:
        _meter.reset(token)


@dataclass(frozen=True)
class GroupParams:
    """
    Order-q subgroup of Z_p^* with p = 2q + 1 and two independent generators.

    The subgroup is exactly the quadratic residues mod p, so membership is a
    Legendre-symbol check.
    """

    p: int
    q: int
    g1: int
    g2: int

    def exp(self, base: int, exponent: int) -> int:
        meter = _meter.get()
        if meter is not None:
            meter.count += 1
        return int(gmpy2.powmod(base, exponent % self.q, self.p))

    def mul(self, *elements: int) -> int:
        result = gmpy2.mpz(1)
        for element in elements:
            result = result * element % self.p
        return int(result)

    def inv(self, element: int) -> int:
        return int(gmpy2.invert(element, self.p))

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def contains(self, element: int) -> bool:
        """True iff ``element`` lies in the order-q subgroup."""
        if not isinstance(element, int) or not 0 < element < self.p:
            return False
        return gmpy2.legendre(element, self.p) == 1

    def contains_all(self, elements) -> bool:
        return all(self.contains(element) for element in elements)

    def random_scalar(self, rng: Drbg) -> int:
        return rng.scalar(self.q)

    def random_element(self, rng: Drbg) -> int:
        return self.exp(self.g1, self.random_scalar(rng))

    def hash_to_group(self, tag: str, *parts) -> int:
        return hash_to_group(self.p, tag, *parts)

    def fingerprint(self) -> bytes:
        return sha256("group", self.p, self.q, self.g1, self.g2)

    def to_dict(self) -> dict:
        return {
            "p": hex_int(self.p),
            "q": hex_int(self.q),
            "g1": hex_int(self.g1),
            "g2": hex_int(self.g2),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroupParams":
        return validate_params(
            parse_hex_int(data["p"]),
            parse_hex_int(data["q"]),
            parse_hex_int(data["g1"]),
            parse_hex_int(data["g2"]),
        )


def hash_to_group(p: int, tag: str, *parts) -> int:
    """
    Map a public string into the quadratic-residue subgroup by squaring.

    Nobody learns a discrete log of the result relative to any other
    generator, which is what the second ElGamal generator needs.
    """
    counter = 0
    while True:
        candidate = int.from_bytes(sha256("hash-to-group", tag, counter, *parts), "big") % p
        element = candidate * candidate % p
        if element not in (0, 1):
            return element
        counter += 1


def validate_params(p: int, q: int, g1: int, g2: int) -> GroupParams:
    """Check the safe-prime relation and generator orders; return the params."""
    if p < 5 or not gmpy2.is_prime(p):
        raise InvalidGroupError("Modulus is not prime", p=p)
    if not gmpy2.is_prime(q) or p != 2 * q + 1:
        raise InvalidGroupError("Order is not a prime with p = 2q + 1", p=p, q=q)
    for name, generator in (("g1", g1), ("g2", g2)):
        if not 1 < generator < p or gmpy2.powmod(generator, q, p) != 1:
            raise InvalidGroupError(f"{name} does not generate the order-q subgroup", p=p)
    if g1 == g2:
        raise InvalidGroupError("Generators must be distinct", p=p)
    return GroupParams(p=p, q=q, g1=g1, g2=g2)


def generate_params(bit_length: int, seed: bytes, max_attempts: int | None = None) -> GroupParams:
    """
    Deterministically search for a safe prime of ``bit_length`` bits; sizes
    with a standard safe prime use it instead of searching.

    Generators are hashed into the subgroup from the seed.
    """
    if bit_length < MIN_BIT_LENGTH:
        raise InvalidGroupError(f"bit_length must be at least {MIN_BIT_LENGTH}", bits=bit_length)
    if bit_length in STANDARD_PRIMES:
        p = STANDARD_PRIMES[bit_length]
        g1, g2 = hash_to_group(p, "g1", seed), hash_to_group(p, "g2", seed)
        return validate_params(p, (p - 1) // 2, g1, g2)
    if max_attempts is None:
        max_attempts = 100 * bit_length * bit_length

    rng = Drbg(encode("group-params", bit_length, seed))
    for attempt in range(max_attempts):
        q = rng.getrandbits(bit_length - 1) | (1 << (bit_length - 2)) | 1
        if not gmpy2.is_prime(q):
            continue
        p = 2 * q + 1
        if not gmpy2.is_prime(p):
            continue
        g1 = hash_to_group(p, "g1", seed)
        g2 = hash_to_group(p, "g2", seed)
        if g1 == g2:
            continue
        logger.debug(
            f"Safe prime found after {attempt + 1} attempts",
            extra={"bits": bit_length, "attempts": attempt + 1},
        )
        return validate_params(p, q, g1, g2)

    raise ParameterSearchError(bits=bit_length, attempts=max_attempts)
