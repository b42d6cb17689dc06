"""
Ideal threshold-FHE functionality.

Ciphertexts are AES-GCM encryptions under an oracle-internal key with the
plaintext-space tag as associated data. Homomorphic evaluations decrypt
internally, apply the plaintext function and re-encrypt, logging a signed
record for each. A real threshold FHE backend replaces this class behind the
same methods.
"""
import logging
import threading
from dataclasses import replace

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, hmac
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat
from django.conf import settings

from apps.core.drbg import Drbg
from apps.core.encoding import encode, sha256
from apps.core.exceptions import (
    InsufficientApprovalsError,
    InvalidShareError,
    OracleRefusalError,
    TagMismatchError,
    UnknownHashKeyError,
)

from .models import (
    Approval,
    DecryptionResult,
    FheCiphertext,
    FhePublicKey,
    HashKey,
    OracleOperation,
    OracleRecord,
    PlaintextTag,
    plaintext_commitment,
)

logger = logging.getLogger(__name__)

NONCE_BYTES = 12
CREDENTIAL_BYTES = 32


def _hmac(key: bytes, data: bytes) -> bytes:
    mac = hmac.HMAC(key, hashes.SHA256())
    mac.update(data)
    return mac.finalize()


def credential_hash(preimage: bytes) -> bytes:
    """Public credential derivation H: sigma = H(x)."""
    return sha256("credential-derivation", preimage)


class SimulatedShare:
    """A tallier's share of the FHE decryption capability."""

    def __init__(self, index: int, secret: bytes):
        self.index = index
        self._secret = secret

    def approve(self, ct: FheCiphertext) -> Approval:
        return Approval(index=self.index, mac=_hmac(self._secret, ct.digest.encode()).hex())

    def check(self, ct: FheCiphertext, approval: Approval) -> bool:
        mac = hmac.HMAC(self._secret, hashes.SHA256())
        mac.update(ct.digest.encode())
        try:
            mac.verify(bytes.fromhex(approval.mac))
        except (InvalidSignature, ValueError):
            return False
        return True


class ApprovalPanel:
    """FHE talliers. The first ``t`` shares approve each decryption request."""

    def __init__(self, public_key: FhePublicKey, shares, quorum=None):
        self.public_key = public_key
        self.t = public_key.t
        self._shares = {share.index: share for share in shares}
        self.quorum = tuple(quorum) if quorum else tuple(sorted(self._shares))[: self.t]

    def approvals(self, ct: FheCiphertext) -> list[Approval]:
        return [self._shares[index].approve(ct) for index in self.quorum]


class FheOracle:
    """
    Guarded handle on the oracle state; every public method is serialized.
    """

    def __init__(self, seed: bytes):
        self._rng = Drbg(encode("fhe-oracle", seed))
        self._aead = AESGCM(sha256("fhe-master-key", seed))
        self._signing = Ed25519PrivateKey.from_private_bytes(sha256("fhe-attestation-key", seed))
        self._lock = threading.RLock()
        self._records: list[OracleRecord] = []
        self._hash_keys: dict[str, bytes] = {}
        self._shares: dict[int, SimulatedShare] = {}
        self._fresh: set[str] = set()
        self._last_decryption: dict[str, int] = {}
        self.public_key: FhePublicKey | None = None

    @property
    def verify_key(self) -> str:
        raw = self._signing.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return raw.hex()

    @property
    def digest_bytes(self) -> int:
        return getattr(settings, "FHE_DIGEST_BYTES", 16)

    def records(self) -> tuple[OracleRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def fhe_keygen(self, t: int, n: int) -> tuple[FhePublicKey, tuple[SimulatedShare, ...]]:
        if not 1 <= t <= n:
            raise InvalidShareError("Threshold must satisfy 1 <= t <= n", t=t, n=n)
        with self._lock:
            shares = tuple(
                SimulatedShare(index, self._rng.randbytes(32)) for index in range(1, n + 1)
            )
            self._shares = {share.index: share for share in shares}
            self.public_key = FhePublicKey(
                key_id=sha256("fhe-key", self.verify_key, t, n).hex()[:16],
                t=t,
                n=n,
                verify_key=self.verify_key,
            )
        logger.info("FHE key generated", extra={"t": t, "n": n})
        return self.public_key, shares

    # ciphertext handling

    def _seal(self, plaintext: bytes, tag: str, generation: int = 0) -> FheCiphertext:
        nonce = self._rng.randbytes(NONCE_BYTES)
        data = nonce + self._aead.encrypt(nonce, plaintext, str(tag).encode())
        return FheCiphertext(data=data, tag=str(tag), generation=generation)

    def _open(self, ct: FheCiphertext, expected: str | None = None) -> bytes:
        if expected is not None and ct.tag != expected:
            raise TagMismatchError(expected=expected, actual=ct.tag)
        try:
            return self._aead.decrypt(
                ct.data[:NONCE_BYTES], ct.data[NONCE_BYTES:], str(ct.tag).encode()
            )
        except InvalidTag as exc:
            raise TagMismatchError(
                "Ciphertext does not authenticate under its tag", tag=ct.tag
            ) from exc

    def _record(self, operation: str, inputs, output: str, **fields) -> OracleRecord:
        record = OracleRecord(
            seq=len(self._records),
            operation=str(operation),
            inputs=tuple(inputs),
            output=output,
            **fields,
        )
        record = replace(record, signature=self._signing.sign(record.message()).hex())
        self._records.append(record)
        return record

    def encrypt(self, plaintext: bytes, tag: str) -> FheCiphertext:
        with self._lock:
            ct = self._seal(bytes(plaintext), PlaintextTag(tag))
            self._fresh.add(ct.digest)
            return ct

    def rerandomize(self, ct: FheCiphertext) -> FheCiphertext:
        with self._lock:
            return self._seal(self._open(ct), ct.tag, ct.generation + 1)

    # homomorphic evaluation

    def new_hash_key(self, label: str) -> HashKey:
        """Fresh keyed-hash key, sampled by the oracle acting as trusted dealer."""
        with self._lock:
            key = self._rng.randbytes(32)
            key_id = f"{label}-{len(self._hash_keys)}"
            self._hash_keys[key_id] = key
            return HashKey(key_id=key_id, encrypted=self._seal(key, PlaintextTag.KEY))

    def eval_keyed_hash(
        self, ct: FheCiphertext, hash_key: HashKey
    ) -> tuple[FheCiphertext, OracleRecord]:
        with self._lock:
            key = self._hash_keys.get(hash_key.key_id)
            if key is None or self._open(hash_key.encrypted, PlaintextTag.KEY) != key:
                raise UnknownHashKeyError(key_id=hash_key.key_id)
            credential = self._open(ct, PlaintextTag.CREDENTIAL)
            digest = _hmac(key, credential)[: self.digest_bytes]
            out = self._seal(digest, PlaintextTag.HASH_DIGEST)
            record = self._record(
                OracleOperation.KEYED_HASH,
                (ct.digest, hash_key.encrypted.digest),
                out.digest,
                context=hash_key.key_id,
            )
            return out, record

    def eval_hash_preimage_eq(
        self, ct_preimage: FheCiphertext, ct_credential: FheCiphertext
    ) -> tuple[FheCiphertext, OracleRecord]:
        with self._lock:
            preimage = self._open(ct_preimage, PlaintextTag.PREIMAGE)
            credential = self._open(ct_credential, PlaintextTag.CREDENTIAL)
            verdict = b"\x01" if credential_hash(preimage) == credential else b"\x00"
            out = self._seal(verdict, PlaintextTag.BOOLEAN)
            record = self._record(
                OracleOperation.PREIMAGE_EQ, (ct_preimage.digest, ct_credential.digest), out.digest
            )
            return out, record

    # decryption

    def threshold_decrypt(self, ct: FheCiphertext, approvals) -> DecryptionResult:
        with self._lock:
            if self.public_key is None:
                raise OracleRefusalError("No FHE key has been generated")
            accepted = sorted(
                {
                    approval.index
                    for approval in approvals
                    if approval.index in self._shares
                    and self._shares[approval.index].check(ct, approval)
                }
            )
            if len(accepted) < self.public_key.t:
                logger.warning(
                    "Oracle refused decryption",
                    extra={"ciphertext": ct.digest, "approvals": len(accepted)},
                )
                raise InsufficientApprovalsError(
                    approvals=len(accepted), threshold=self.public_key.t
                )

            plaintext = self._open(ct)
            record = self._record(
                OracleOperation.DECRYPT,
                (ct.digest,),
                "",
                approvals=tuple(accepted),
                commitment=plaintext_commitment(plaintext),
                link=self._last_decryption.get(ct.digest),
            )
            self._last_decryption[ct.digest] = record.seq
            return DecryptionResult(plaintext=plaintext, record=record)

    # attestations

    def attest_ballot(self, election_id: bytes, *cts: FheCiphertext) -> OracleRecord:
        """
        Stand-in for a proof of plaintext knowledge: the oracle only attests
        ciphertexts it produced as fresh encryptions, bound to the election.
        """
        with self._lock:
            for ct in cts:
                if ct.generation != 0 or ct.digest not in self._fresh:
                    raise OracleRefusalError("Ciphertext is not a fresh encryption", ct=ct.digest)
                self._open(ct)
            return self._record(
                OracleOperation.BALLOT,
                tuple(ct.digest for ct in cts),
                "",
                context=election_id.hex(),
            )

    def attest_rerandomization(self, src: FheCiphertext, dst: FheCiphertext) -> OracleRecord:
        with self._lock:
            if src.tag != dst.tag or self._open(src) != self._open(dst):
                raise OracleRefusalError("Ciphertexts do not share a plaintext")
            return self._record(OracleOperation.LINK, (src.digest,), dst.digest)


def verify_attestation(record: OracleRecord, verify_key: str, operation: str | None = None) -> bool:
    if operation is not None and record.operation != operation:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(bytes.fromhex(verify_key)).verify(
            bytes.fromhex(record.signature), record.message()
        )
    except (InvalidSignature, ValueError):
        return False
    return True


def verify_decryption_record(
    record: OracleRecord, verify_key: str, ct: FheCiphertext, plaintext: bytes, threshold: int
) -> bool:
    """A published decryption matches its attested input, commitment and quorum."""
    return (
        verify_attestation(record, verify_key, OracleOperation.DECRYPT)
        and record.inputs == (ct.digest,)
        and record.commitment == plaintext_commitment(plaintext)
        and len(set(record.approvals)) >= threshold
    )
