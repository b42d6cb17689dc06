"""
Trusted-dealer threshold sharing of (x1, x2) and verifiable distributed decryption.
"""
import logging
from dataclasses import dataclass

import gmpy2

from apps.core.drbg import Drbg
from apps.core.encoding import hex_int, parse_hex_int
from apps.core.exceptions import InvalidShareError

from .elgamal import ElGamalCiphertext, KeyPair, PublicKey
from .group import GroupParams
from .nizk import ProofContext, SigmaProof, prove_share_decryption, verify_share_decryption

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KeyShare:
    index: int
    x1: int
    x2: int
    commitment: int


@dataclass(frozen=True)
class ThresholdShares:
    """Dealer output: one share per tallier plus the public commitments h_i."""

    params: GroupParams
    t: int
    n: int
    h: int
    shares: tuple[KeyShare, ...]

    @property
    def commitments(self) -> dict[int, int]:
        return {share.index: share.commitment for share in self.shares}

    @property
    def public(self) -> PublicKey:
        return PublicKey(params=self.params, h=self.h)


def _evaluate(coefficients, x: int, q: int) -> int:
    result = 0
    for coefficient in reversed(coefficients):
        result = (result * x + coefficient) % q
    return result


def deal_shares(keypair: KeyPair, t: int, n: int, rng: Drbg) -> ThresholdShares:
    """Shamir-share both secret scalars with degree t-1 polynomials."""
    params = keypair.params
    if not 1 <= t <= n:
        raise InvalidShareError("Threshold must satisfy 1 <= t <= n", t=t, n=n)
    poly1 = [keypair.x1] + [params.random_scalar(rng) for _ in range(t - 1)]
    poly2 = [keypair.x2] + [params.random_scalar(rng) for _ in range(t - 1)]

    shares = []
    for index in range(1, n + 1):
        x1 = _evaluate(poly1, index, params.q)
        x2 = _evaluate(poly2, index, params.q)
        commitment = params.mul(params.exp(params.g1, x1), params.exp(params.g2, x2))
        shares.append(KeyShare(index=index, x1=x1, x2=x2, commitment=commitment))
    return ThresholdShares(params=params, t=t, n=n, h=keypair.h, shares=tuple(shares))


def lagrange_coefficient(q: int, index: int, indices) -> int:
    """Coefficient of share ``index`` when interpolating at zero."""
    numerator, denominator = 1, 1
    for other in indices:
        if other == index:
            continue
        numerator = numerator * other % q
        denominator = denominator * (other - index) % q
    return numerator * int(gmpy2.invert(denominator, q)) % q


def reconstruct(params: GroupParams, shares) -> tuple[int, int]:
    shares = list(shares)
    indices = [share.index for share in shares]
    x1 = sum(share.x1 * lagrange_coefficient(params.q, share.index, indices) for share in shares)
    x2 = sum(share.x2 * lagrange_coefficient(params.q, share.index, indices) for share in shares)
    return x1 % params.q, x2 % params.q


@dataclass(frozen=True)
class DecryptionShare:
    index: int
    value: int
    proof: SigmaProof

    def to_dict(self) -> dict:
        return {"index": self.index, "value": hex_int(self.value), "proof": self.proof.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "DecryptionShare":
        return cls(
            index=int(data["index"]),
            value=parse_hex_int(data["value"]),
            proof=SigmaProof.from_dict(data["proof"]),
        )


def partial_decrypt(
    params: GroupParams, share: KeyShare, ct: ElGamalCiphertext, ctx: ProofContext, rng: Drbg
) -> DecryptionShare:
    expected = params.mul(params.exp(params.g1, share.x1), params.exp(params.g2, share.x2))
    if expected != share.commitment:
        raise InvalidShareError(index=share.index)
    value = params.mul(params.exp(ct.u, share.x1), params.exp(ct.v, share.x2))
    proof = prove_share_decryption(
        params, ct, share.commitment, value, (share.x1, share.x2), ctx, rng
    )
    return DecryptionShare(index=share.index, value=value, proof=proof)


def combine_shares(params: GroupParams, ct: ElGamalCiphertext, shares) -> int:
    shares = list(shares)
    indices = [share.index for share in shares]
    mask = params.mul(
        *(
            params.exp(share.value, lagrange_coefficient(params.q, share.index, indices))
            for share in shares
        )
    )
    return params.div(ct.w, mask)


@dataclass(frozen=True)
class DecryptionTranscript:
    ciphertext: ElGamalCiphertext
    shares: tuple[DecryptionShare, ...]
    plaintext: int

    def to_dict(self) -> dict:
        return {
            "ciphertext": self.ciphertext.to_list(),
            "shares": [share.to_dict() for share in self.shares],
            "plaintext": hex_int(self.plaintext),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecryptionTranscript":
        return cls(
            ciphertext=ElGamalCiphertext.from_list(data["ciphertext"]),
            shares=tuple(DecryptionShare.from_dict(share) for share in data["shares"]),
            plaintext=parse_hex_int(data["plaintext"]),
        )


def verify_decryption(
    params: GroupParams,
    commitments: dict[int, int],
    t: int,
    transcript: DecryptionTranscript,
    ctx: ProofContext,
) -> bool:
    """Every share proof verifies, at least t distinct talliers took part, and they combine."""
    indices = [share.index for share in transcript.shares]
    if len(set(indices)) != len(indices) or len(indices) < t:
        return False
    for share in transcript.shares:
        commitment = commitments.get(share.index)
        if commitment is None:
            return False
        if not verify_share_decryption(
            params, transcript.ciphertext, commitment, share.value, share.proof, ctx
        ):
            return False
    return combine_shares(params, transcript.ciphertext, transcript.shares) == transcript.plaintext


class TallierPanel:
    """
    The talliers holding key shares. The first ``t`` of them form the quorum
    that answers decryption and blinding requests.
    """

    def __init__(self, shares: ThresholdShares, rng: Drbg, quorum=None):
        self.params = shares.params
        self.t = shares.t
        self.n = shares.n
        self.public = shares.public
        self.commitments = shares.commitments
        self._shares = {share.index: share for share in shares.shares}
        self._rng = rng
        self.quorum = tuple(quorum) if quorum else tuple(sorted(self._shares))[: self.t]

    @classmethod
    def from_keypair(cls, keypair: KeyPair, t: int, n: int, rng: Drbg, quorum=None):
        return cls(deal_shares(keypair, t, n, rng.child("dealer")), rng.child("talliers"), quorum)

    def decrypt(self, ct: ElGamalCiphertext, ctx: ProofContext) -> DecryptionTranscript:
        shares = tuple(
            partial_decrypt(self.params, self._shares[index], ct, ctx, self._rng)
            for index in self.quorum
        )
        plaintext = combine_shares(self.params, ct, shares)
        return DecryptionTranscript(ciphertext=ct, shares=shares, plaintext=plaintext)

    def verify(self, transcript: DecryptionTranscript, ctx: ProofContext) -> bool:
        return verify_decryption(self.params, self.commitments, self.t, transcript, ctx)

    def blinding_exponents(self, label: str) -> dict[int, int]:
        """One fresh secret exponent per quorum member, fixed for one blinding stage."""
        stream = self._rng.child(f"blinding/{label}")
        return {index: self.params.random_scalar(stream) for index in self.quorum}

    @property
    def rng(self) -> Drbg:
        return self._rng
