"""
Re-encryption schemes a mix column can carry.

A scheme re-encrypts a ciphertext, produces an opening that links two
re-encryptions of the same source, and verifies such openings publicly.
"""
from apps.core.drbg import Drbg
from apps.core.encoding import hex_int, parse_hex_int
from apps.crypto import elgamal
from apps.crypto.elgamal import ElGamalCiphertext, PublicKey
from apps.fhe.models import FheCiphertext, OracleOperation, OracleRecord
from apps.fhe.oracle import FheOracle, verify_attestation


class ElGamalScheme:
    """Witness is the re-encryption randomness; openings are randomness differences."""

    name = "elgamal"
    ciphertext_type = ElGamalCiphertext

    def __init__(self, pk: PublicKey):
        self.pk = pk
        self.q = pk.params.q

    def reencrypt(self, ct: ElGamalCiphertext, rng: Drbg, zero: bool = False):
        r = 0 if zero else self.pk.params.random_scalar(rng)
        return elgamal.reencrypt(self.pk, ct, r), r

    def link(self, src, dst, src_witness, dst_witness) -> str:
        return hex_int((dst_witness - (src_witness or 0)) % self.q)

    def verify_link(self, src, dst, opening) -> bool:
        try:
            r = parse_hex_int(opening)
        except (TypeError, ValueError):
            return False
        return elgamal.reencrypt(self.pk, src, r) == dst

    def encode(self, ct: ElGamalCiphertext):
        return ct.components()

    def dump(self, ct: ElGamalCiphertext):
        return ct.to_list()

    def load(self, data) -> ElGamalCiphertext:
        return ElGamalCiphertext.from_list(data)


class FheScheme:
    """Re-randomization through the oracle; openings are oracle link attestations."""

    name = "fhe"
    ciphertext_type = FheCiphertext

    def __init__(self, oracle: FheOracle | None, verify_key: str):
        self.oracle = oracle
        self.verify_key = verify_key

    def reencrypt(self, ct: FheCiphertext, rng: Drbg, zero: bool = False):
        return self.oracle.rerandomize(ct), None

    def link(self, src, dst, src_witness, dst_witness) -> dict:
        return self.oracle.attest_rerandomization(src, dst).to_dict()

    def verify_link(self, src, dst, opening) -> bool:
        try:
            record = OracleRecord.from_dict(opening)
        except (KeyError, TypeError, ValueError):
            return False
        return (
            verify_attestation(record, self.verify_key, OracleOperation.LINK)
            and record.inputs == (src.digest,)
            and record.output == dst.digest
        )

    def encode(self, ct: FheCiphertext):
        return ct.digest

    def dump(self, ct: FheCiphertext):
        return ct.to_dict()

    def load(self, data) -> FheCiphertext:
        return FheCiphertext.from_dict(data)
