"""
Two-generator ElGamal: keys, encryption, re-encryption and homomorphic helpers.
"""
from dataclasses import dataclass

from apps.core.drbg import Drbg
from apps.core.encoding import hex_int, parse_hex_int
from apps.core.exceptions import DegenerateKeyError, EncodingError

from .group import GroupParams


@dataclass(frozen=True)
class ElGamalCiphertext:
    """Canonical component order (u, v, w) = (g1^r, g2^r, m * h^r)."""

    u: int
    v: int
    w: int

    def components(self) -> tuple[int, int, int]:
        return (self.u, self.v, self.w)

    def to_list(self) -> list[str]:
        return [hex_int(self.u), hex_int(self.v), hex_int(self.w)]

    @classmethod
    def from_list(cls, data) -> "ElGamalCiphertext":
        u, v, w = (parse_hex_int(item) for item in data)
        return cls(u, v, w)


@dataclass(frozen=True)
class PublicKey:
    params: GroupParams
    h: int

    def to_dict(self) -> dict:
        return {"h": hex_int(self.h)}


@dataclass(frozen=True)
class KeyPair:
    """Secret scalars (x1, x2) with public h = g1^x1 * g2^x2."""

    params: GroupParams
    x1: int
    x2: int
    h: int

    @classmethod
    def from_secrets(cls, params: GroupParams, x1: int, x2: int) -> "KeyPair":
        x1, x2 = x1 % params.q, x2 % params.q
        h = params.mul(params.exp(params.g1, x1), params.exp(params.g2, x2))
        if h == 1:
            raise DegenerateKeyError(x1=x1, x2=x2)
        return cls(params=params, x1=x1, x2=x2, h=h)

    @property
    def public(self) -> PublicKey:
        return PublicKey(params=self.params, h=self.h)


def keygen(params: GroupParams, rng: Drbg) -> KeyPair:
    while True:
        try:
            return KeyPair.from_secrets(params, rng.randrange(params.q), rng.randrange(params.q))
        except DegenerateKeyError:
            continue


def encrypt(pk: PublicKey, m: int, r: int) -> ElGamalCiphertext:
    params = pk.params
    if not params.contains(m):
        raise EncodingError(m=m)
    return ElGamalCiphertext(
        u=params.exp(params.g1, r),
        v=params.exp(params.g2, r),
        w=params.mul(m, params.exp(pk.h, r)),
    )


def reencrypt(pk: PublicKey, ct: ElGamalCiphertext, r: int) -> ElGamalCiphertext:
    """Multiply by an encryption of the identity; the plaintext is unchanged."""
    return multiply(pk.params, ct, encrypt(pk, 1, r))


def decrypt(sk: KeyPair, ct: ElGamalCiphertext) -> int:
    params = sk.params
    mask = params.mul(params.exp(ct.u, sk.x1), params.exp(ct.v, sk.x2))
    return params.div(ct.w, mask)


def multiply(params: GroupParams, a: ElGamalCiphertext, b: ElGamalCiphertext) -> ElGamalCiphertext:
    return ElGamalCiphertext(
        u=params.mul(a.u, b.u), v=params.mul(a.v, b.v), w=params.mul(a.w, b.w)
    )


def quotient(params: GroupParams, a: ElGamalCiphertext, b: ElGamalCiphertext) -> ElGamalCiphertext:
    """Componentwise division; encrypts m_a / m_b."""
    return ElGamalCiphertext(
        u=params.div(a.u, b.u), v=params.div(a.v, b.v), w=params.div(a.w, b.w)
    )


def power(params: GroupParams, ct: ElGamalCiphertext, exponent: int) -> ElGamalCiphertext:
    return ElGamalCiphertext(*(params.exp(c, exponent) for c in ct.components()))


def is_well_formed(params: GroupParams, ct: ElGamalCiphertext) -> bool:
    return params.contains_all(ct.components())
