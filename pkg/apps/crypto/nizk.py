"""
Fiat-Shamir sigma proofs over the two-generator group.

Everything is built on one engine: knowledge of exponents w_1..w_k such that
each target equals a product of bases raised to those exponents. Exponent
consistency, decryption-share correctness and ballot credential proofs are
statements of that shape; slate membership is an OR-composition of them.

Challenges hash the proof tag, the election identifier, the statement and
the commitments (strong Fiat-Shamir), reduced mod q.
"""
from dataclasses import dataclass, replace

from apps.core.drbg import Drbg
from apps.core.encoding import hash_to_scalar, hex_int, parse_hex_int, sha256
from apps.core.exceptions import ProofError

from .elgamal import ElGamalCiphertext, PublicKey
from .group import GroupParams

TAG_REPRESENTATION = "proof/representation"
TAG_EXPONENT = "proof/exponent-consistency"
TAG_DECRYPTION = "proof/share-decryption"
TAG_MEMBERSHIP = "proof/slate-membership"
TAG_CREDENTIAL = "proof/ballot-credential"


@dataclass(frozen=True)
class ProofContext:
    """Election identifier, statement label and a running transcript hash."""

    election_id: bytes
    label: bytes = b""
    chain: bytes = b""

    def bind(self, label: str) -> "ProofContext":
        return replace(self, label=label.encode("utf-8"))

    def extend(self, *parts) -> "ProofContext":
        return replace(self, chain=sha256("context-chain", self.chain, *parts))

    def encode(self) -> tuple:
        return (self.election_id, self.label, self.chain)


@dataclass(frozen=True)
class RepresentationStatement:
    """
    targets[j] = prod_k bases[j][k] ** w[k]; a base of 1 means "absent".
    """

    bases: tuple[tuple[int, ...], ...]
    targets: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.bases[0]) if self.bases else 0

    def is_well_formed(self, params: GroupParams) -> bool:
        if not self.bases or len(self.bases) != len(self.targets):
            return False
        if any(len(row) != self.width for row in self.bases):
            return False
        for row in self.bases:
            if any(base != 1 and not params.contains(base) for base in row):
                return False
        return params.contains_all(self.targets)

    def evaluate(self, params: GroupParams, exponents) -> tuple[int, ...]:
        return tuple(
            params.mul(*(params.exp(base, e) for base, e in zip(row, exponents) if base != 1))
            for row in self.bases
        )

    def encode(self) -> tuple:
        return (self.bases, self.targets)


@dataclass(frozen=True)
class SigmaProof:
    commitments: tuple[int, ...]
    responses: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "commitments": [hex_int(c) for c in self.commitments],
            "responses": [hex_int(s) for s in self.responses],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SigmaProof":
        return cls(
            commitments=tuple(parse_hex_int(c) for c in data["commitments"]),
            responses=tuple(parse_hex_int(s) for s in data["responses"]),
        )


def _challenge(params: GroupParams, tag: str, statement: RepresentationStatement, ctx, commitments):
    return hash_to_scalar(params.q, tag, ctx.encode(), statement.encode(), commitments)


def prove_representation(
    params: GroupParams,
    statement: RepresentationStatement,
    witnesses,
    ctx: ProofContext,
    rng: Drbg,
    tag: str = TAG_REPRESENTATION,
) -> SigmaProof:
    witnesses = tuple(w % params.q for w in witnesses)
    if len(witnesses) != statement.width:
        raise ProofError("Witness count does not match the statement", tag=tag)
    if statement.evaluate(params, witnesses) != statement.targets:
        raise ProofError("Witness does not satisfy the statement", tag=tag)

    nonces = tuple(params.random_scalar(rng) for _ in witnesses)
    commitments = statement.evaluate(params, nonces)
    c = _challenge(params, tag, statement, ctx, commitments)
    responses = tuple((k + c * w) % params.q for k, w in zip(nonces, witnesses))
    return SigmaProof(commitments=commitments, responses=responses)


def verify_representation(
    params: GroupParams,
    statement: RepresentationStatement,
    proof: SigmaProof,
    ctx: ProofContext,
    tag: str = TAG_REPRESENTATION,
) -> bool:
    if not statement.is_well_formed(params):
        return False
    if len(proof.commitments) != len(statement.targets) or len(proof.responses) != statement.width:
        return False
    if not params.contains_all(proof.commitments):
        return False
    if any(not 0 <= s < params.q for s in proof.responses):
        return False

    c = _challenge(params, tag, statement, ctx, proof.commitments)
    lhs = statement.evaluate(params, proof.responses)
    for left, commitment, target in zip(lhs, proof.commitments, statement.targets):
        if left != params.mul(commitment, params.exp(target, c)):
            return False
    return True


def exponent_statement(base, power) -> RepresentationStatement:
    return RepresentationStatement(
        bases=tuple((b,) for b in base), targets=tuple(power)
    )


def prove_exponent_consistency(
    params: GroupParams, base, power, exponent: int, ctx: ProofContext, rng: Drbg
) -> SigmaProof:
    """Chaum-Pedersen: every power[i] = base[i] ** exponent for one exponent."""
    return prove_representation(
        params, exponent_statement(base, power), (exponent,), ctx, rng, tag=TAG_EXPONENT
    )


def verify_exponent_consistency(
    params: GroupParams, base, power, proof: SigmaProof, ctx: ProofContext
) -> bool:
    if len(base) != len(power):
        return False
    return verify_representation(
        params, exponent_statement(base, power), proof, ctx, tag=TAG_EXPONENT
    )


def share_statement(
    params: GroupParams, ct: ElGamalCiphertext, commitment: int, share_value: int
) -> RepresentationStatement:
    return RepresentationStatement(
        bases=((params.g1, params.g2), (ct.u, ct.v)), targets=(commitment, share_value)
    )


def prove_share_decryption(
    params: GroupParams,
    ct: ElGamalCiphertext,
    commitment: int,
    share_value: int,
    witnesses: tuple[int, int],
    ctx: ProofContext,
    rng: Drbg,
) -> SigmaProof:
    """Links d_i = u^x1_i * v^x2_i to the public share commitment h_i."""
    statement = share_statement(params, ct, commitment, share_value)
    return prove_representation(params, statement, witnesses, ctx, rng, tag=TAG_DECRYPTION)


def verify_share_decryption(
    params: GroupParams,
    ct: ElGamalCiphertext,
    commitment: int,
    share_value: int,
    proof: SigmaProof,
    ctx: ProofContext,
) -> bool:
    statement = share_statement(params, ct, commitment, share_value)
    return verify_representation(params, statement, proof, ctx, tag=TAG_DECRYPTION)


@dataclass(frozen=True)
class MembershipProof:
    """One (commitment triple, challenge, response) branch per slate entry."""

    commitments: tuple[tuple[int, int, int], ...]
    challenges: tuple[int, ...]
    responses: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "commitments": [[hex_int(c) for c in triple] for triple in self.commitments],
            "challenges": [hex_int(c) for c in self.challenges],
            "responses": [hex_int(s) for s in self.responses],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MembershipProof":
        return cls(
            commitments=tuple(
                tuple(parse_hex_int(c) for c in triple) for triple in data["commitments"]
            ),
            challenges=tuple(parse_hex_int(c) for c in data["challenges"]),
            responses=tuple(parse_hex_int(s) for s in data["responses"]),
        )


def _branch_targets(params: GroupParams, ct: ElGamalCiphertext, candidate: int):
    return (ct.u, ct.v, params.div(ct.w, candidate))


def prove_membership(
    pk: PublicKey,
    ct: ElGamalCiphertext,
    slate,
    witness: tuple[int, int],
    ctx: ProofContext,
    rng: Drbg,
) -> MembershipProof:
    """Disjunctive proof that ``ct`` re-encrypts one of the slate elements."""
    params = pk.params
    j, r = witness
    slate = tuple(slate)
    if not 0 <= j < len(slate):
        raise ProofError("Slate index out of range", index=j, slate_size=len(slate))
    bases = (params.g1, params.g2, pk.h)
    if _branch_targets(params, ct, slate[j]) != tuple(params.exp(b, r) for b in bases):
        raise ProofError("Ciphertext does not encrypt the claimed slate element", index=j)

    commitments, challenges, responses = [], [], []
    nonce = params.random_scalar(rng)
    for index, candidate in enumerate(slate):
        if index == j:
            commitments.append(tuple(params.exp(b, nonce) for b in bases))
            challenges.append(0)
            responses.append(0)
            continue
        c_i = params.random_scalar(rng)
        s_i = params.random_scalar(rng)
        targets = _branch_targets(params, ct, candidate)
        commitments.append(
            tuple(
                params.div(params.exp(b, s_i), params.exp(y, c_i)) for b, y in zip(bases, targets)
            )
        )
        challenges.append(c_i)
        responses.append(s_i)

    total = hash_to_scalar(
        params.q, TAG_MEMBERSHIP, ctx.encode(), ct.components(), pk.h, slate, commitments
    )
    challenges[j] = (total - sum(challenges)) % params.q
    responses[j] = (nonce + challenges[j] * r) % params.q
    return MembershipProof(
        commitments=tuple(commitments), challenges=tuple(challenges), responses=tuple(responses)
    )


def verify_membership(
    pk: PublicKey, ct: ElGamalCiphertext, slate, proof: MembershipProof, ctx: ProofContext
) -> bool:
    params = pk.params
    slate = tuple(slate)
    if not params.contains_all(ct.components()):
        return False
    if not (len(proof.commitments) == len(proof.challenges) == len(proof.responses) == len(slate)):
        return False
    if any(len(triple) != 3 or not params.contains_all(triple) for triple in proof.commitments):
        return False
    if any(not 0 <= value < params.q for value in proof.challenges + proof.responses):
        return False

    total = hash_to_scalar(
        params.q, TAG_MEMBERSHIP, ctx.encode(), ct.components(), pk.h, slate, proof.commitments
    )
    if sum(proof.challenges) % params.q != total:
        return False

    bases = (params.g1, params.g2, pk.h)
    for candidate, triple, c_i, s_i in zip(
        slate, proof.commitments, proof.challenges, proof.responses
    ):
        targets = _branch_targets(params, ct, candidate)
        for base, commitment, target in zip(bases, triple, targets):
            if params.exp(base, s_i) != params.mul(commitment, params.exp(target, c_i)):
                return False
    return True


@dataclass(frozen=True)
class BallotProofBundle:
    """Credential-randomness knowledge plus vote-in-slate membership, bound together."""

    credential: SigmaProof
    membership: MembershipProof

    def to_dict(self) -> dict:
        return {"credential": self.credential.to_dict(), "membership": self.membership.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "BallotProofBundle":
        return cls(
            credential=SigmaProof.from_dict(data["credential"]),
            membership=MembershipProof.from_dict(data["membership"]),
        )


def _ballot_context(ctx: ProofContext, vote: ElGamalCiphertext, credential: ElGamalCiphertext):
    return ctx.bind("ballot").extend(vote.components(), credential.components())


def credential_statement(params: GroupParams, credential: ElGamalCiphertext):
    return RepresentationStatement(
        bases=((params.g1,), (params.g2,)), targets=(credential.u, credential.v)
    )


def prove_ballot(
    pk: PublicKey,
    vote: ElGamalCiphertext,
    credential: ElGamalCiphertext,
    slate,
    choice: int,
    vote_randomness: int,
    credential_randomness: int,
    ctx: ProofContext,
    rng: Drbg,
) -> BallotProofBundle:
    bound = _ballot_context(ctx, vote, credential)
    return BallotProofBundle(
        credential=prove_representation(
            pk.params,
            credential_statement(pk.params, credential),
            (credential_randomness,),
            bound,
            rng,
            tag=TAG_CREDENTIAL,
        ),
        membership=prove_membership(pk, vote, slate, (choice, vote_randomness), bound, rng),
    )


def verify_ballot(
    pk: PublicKey,
    vote: ElGamalCiphertext,
    credential: ElGamalCiphertext,
    slate,
    bundle: BallotProofBundle,
    ctx: ProofContext,
) -> bool:
    params = pk.params
    if not params.contains_all(credential.components()):
        return False
    bound = _ballot_context(ctx, vote, credential)
    if not verify_representation(
        params, credential_statement(params, credential), bundle.credential, bound, TAG_CREDENTIAL
    ):
        return False
    return verify_membership(pk, vote, slate, bundle.membership, bound)
