"""
Distributed plaintext equivalence test.

The quotient of the two ciphertexts encrypts m_a / m_b. Each quorum tallier
raises it to a secret exponent z_i and proves the same exponent was used on
all three components; the product encrypts (m_a / m_b)^(sum z_i), which is the
identity iff the plaintexts match and a uniform non-identity element otherwise.
"""
import logging
from dataclasses import dataclass

from apps.core.encoding import hex_int, parse_hex_int

from . import elgamal
from .elgamal import ElGamalCiphertext
from .group import GroupParams
from .nizk import ProofContext, SigmaProof, prove_exponent_consistency, verify_exponent_consistency
from .threshold import DecryptionShare, DecryptionTranscript, TallierPanel, verify_decryption

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlindingContribution:
    index: int
    power: ElGamalCiphertext
    proof: SigmaProof

    def to_dict(self) -> dict:
        return {"index": self.index, "power": self.power.to_list(), "proof": self.proof.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "BlindingContribution":
        return cls(
            index=int(data["index"]),
            power=ElGamalCiphertext.from_list(data["power"]),
            proof=SigmaProof.from_dict(data["proof"]),
        )


@dataclass(frozen=True)
class PetTranscript:
    left: ElGamalCiphertext
    right: ElGamalCiphertext
    contributions: tuple[BlindingContribution, ...]
    blinded: ElGamalCiphertext
    decryption: DecryptionTranscript
    verdict: bool
    valid: bool = True

    def to_dict(self) -> dict:
        """Posted form; the inputs and the blinded quotient are recomputed by readers."""
        return {
            "contributions": [c.to_dict() for c in self.contributions],
            "shares": [share.to_dict() for share in self.decryption.shares],
            "plaintext": hex_int(self.decryption.plaintext),
            "verdict": self.verdict,
            "valid": self.valid,
        }

    @classmethod
    def from_dict(
        cls, params: GroupParams, data: dict, left: ElGamalCiphertext, right: ElGamalCiphertext
    ) -> "PetTranscript":
        contributions = tuple(BlindingContribution.from_dict(c) for c in data["contributions"])
        blinded = _combine(params, elgamal.quotient(params, left, right), contributions)
        return cls(
            left=left,
            right=right,
            contributions=contributions,
            blinded=blinded,
            decryption=DecryptionTranscript(
                ciphertext=blinded,
                shares=tuple(DecryptionShare.from_dict(share) for share in data["shares"]),
                plaintext=parse_hex_int(data["plaintext"]),
            ),
            verdict=bool(data["verdict"]),
            valid=bool(data["valid"]),
        )


def _combine(params: GroupParams, quotient: ElGamalCiphertext, contributions) -> ElGamalCiphertext:
    if not contributions:
        return quotient
    blinded = contributions[0].power
    for contribution in contributions[1:]:
        blinded = elgamal.multiply(params, blinded, contribution.power)
    return blinded


def pet_context(ctx: ProofContext, left: ElGamalCiphertext, right: ElGamalCiphertext):
    return ctx.bind("pet").extend(left.components(), right.components())


def _contributions_valid(params: GroupParams, quotient, contributions, ctx) -> bool:
    identity = (1, 1, 1)
    for contribution in contributions:
        power = contribution.power.components()
        # a zero exponent would force a match
        if power == identity and quotient.components() != identity:
            return False
        if not verify_exponent_consistency(
            params, quotient.components(), power, contribution.proof, ctx
        ):
            return False
    return True


def pet(
    talliers: TallierPanel, ct_a: ElGamalCiphertext, ct_b: ElGamalCiphertext, ctx: ProofContext
) -> PetTranscript:
    params = talliers.params
    bound = pet_context(ctx, ct_a, ct_b)
    quotient = elgamal.quotient(params, ct_a, ct_b)

    contributions = []
    for index in talliers.quorum:
        z = params.random_scalar(talliers.rng)
        power = elgamal.power(params, quotient, z)
        proof = prove_exponent_consistency(
            params, quotient.components(), power.components(), z, bound, talliers.rng
        )
        contributions.append(BlindingContribution(index=index, power=power, proof=proof))

    blinded = _combine(params, quotient, contributions)

    valid = _contributions_valid(params, quotient, contributions, bound)
    if not valid:
        logger.warning("PET blinding proof failed", extra={"quorum": list(talliers.quorum)})

    decryption = talliers.decrypt(blinded, bound)
    return PetTranscript(
        left=ct_a,
        right=ct_b,
        contributions=tuple(contributions),
        blinded=blinded,
        decryption=decryption,
        verdict=decryption.plaintext == 1,
        valid=valid,
    )


def verify_pet(
    params: GroupParams,
    commitments: dict[int, int],
    t: int,
    transcript: PetTranscript,
    ctx: ProofContext,
) -> bool:
    """Public check: blinding proofs, their product, the decryption and the verdict."""
    bound = pet_context(ctx, transcript.left, transcript.right)
    quotient = elgamal.quotient(params, transcript.left, transcript.right)
    contributions = transcript.contributions

    indices = [c.index for c in contributions]
    if len(set(indices)) != len(indices) or len(indices) < t:
        return False
    if not _contributions_valid(params, quotient, contributions, bound):
        return False

    blinded = _combine(params, quotient, contributions)
    if blinded != transcript.blinded or transcript.decryption.ciphertext != blinded:
        return False
    if not verify_decryption(params, commitments, t, transcript.decryption, bound):
        return False
    return transcript.valid and transcript.verdict == (transcript.decryption.plaintext == 1)
