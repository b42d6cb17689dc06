"""
Verifiable re-encryption mix over paired ciphertext lists.

Every server permutes and re-encrypts all columns in lockstep with one secret
permutation. Correctness is shown by cut-and-choose: the server also builds
``shadow_rounds`` independent shadow mixes of its input, and a Fiat-Shamir
challenge bit per shadow decides whether the server opens the shadow toward
its input (bit 0) or toward its output (bit 1). A server that changed any
plaintext survives each round with probability 1/2.
"""
import logging
from dataclasses import dataclass, field

from apps.core.drbg import Drbg
from apps.core.encoding import sha256
from apps.core.exceptions import MixError

logger = logging.getLogger(__name__)

DEFAULT_SHADOW_ROUNDS = 16


@dataclass
class MixServer:
    """
    A mix authority. ``permutation`` and ``zero_randomness`` force the main
    mix for tests; shadows stay random.
    """

    name: str
    permutation: list[int] | None = None
    zero_randomness: bool = False


@dataclass(frozen=True)
class ShadowRound:
    rows: tuple
    bit: int
    mapping: tuple[int, ...]
    openings: tuple


@dataclass(frozen=True)
class ServerProof:
    server: str
    inputs: tuple
    outputs: tuple
    shadows: tuple[ShadowRound, ...]


@dataclass(frozen=True)
class MixBatch:
    """
    Input rows, output rows and per-server evidence. ``permutation`` is the
    composed secret permutation (output[permutation[i]] re-encrypts input[i])
    and is never serialized.
    """

    inputs: tuple
    outputs: tuple
    servers: tuple[ServerProof, ...]
    label: str = ""
    permutation: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def column(self, index: int) -> list:
        return [row[index] for row in self.outputs]

    def to_dict(self, schemes) -> dict:
        def rows(items):
            return [[scheme.dump(ct) for scheme, ct in zip(schemes, row)] for row in items]

        return {
            "label": self.label,
            "columns": [scheme.name for scheme in schemes],
            "inputs": rows(self.inputs),
            "outputs": rows(self.outputs),
            "servers": [
                {
                    "server": proof.server,
                    "inputs": rows(proof.inputs),
                    "outputs": rows(proof.outputs),
                    "shadows": [
                        {
                            "rows": rows(shadow.rows),
                            "bit": shadow.bit,
                            "mapping": list(shadow.mapping),
                            "openings": [list(opening) for opening in shadow.openings],
                        }
                        for shadow in proof.shadows
                    ],
                }
                for proof in self.servers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, schemes) -> "MixBatch":
        def rows(items):
            return tuple(
                tuple(scheme.load(ct) for scheme, ct in zip(schemes, row)) for row in items
            )

        if data.get("columns") != [scheme.name for scheme in schemes]:
            raise MixError("Mix columns do not match the expected schemes")
        return cls(
            inputs=rows(data["inputs"]),
            outputs=rows(data["outputs"]),
            servers=tuple(
                ServerProof(
                    server=proof["server"],
                    inputs=rows(proof["inputs"]),
                    outputs=rows(proof["outputs"]),
                    shadows=tuple(
                        ShadowRound(
                            rows=rows(shadow["rows"]),
                            bit=int(shadow["bit"]),
                            mapping=tuple(int(i) for i in shadow["mapping"]),
                            openings=tuple(tuple(o) for o in shadow["openings"]),
                        )
                        for shadow in proof["shadows"]
                    ),
                )
                for proof in data["servers"]
            ),
            label=data.get("label", ""),
        )


def _columns_to_rows(columns, schemes) -> tuple:
    columns = [list(column) for column in columns]
    if not columns or len(columns) != len(schemes):
        raise MixError("One scheme is required per column", columns=len(columns))
    length = len(columns[0])
    if any(len(column) != length for column in columns):
        raise MixError(lengths=[len(column) for column in columns])
    for scheme, column in zip(schemes, columns):
        if any(not isinstance(ct, scheme.ciphertext_type) for ct in column):
            raise MixError("Mixed ciphertext types in one column", scheme=scheme.name)
    return tuple(zip(*columns)) if length else ()


def _shuffle(rows, permutation, schemes, rng: Drbg, zero: bool = False):
    out = [None] * len(rows)
    witnesses = [None] * len(rows)
    for i, row in enumerate(rows):
        pairs = [scheme.reencrypt(ct, rng, zero) for scheme, ct in zip(schemes, row)]
        out[permutation[i]] = tuple(ct for ct, _ in pairs)
        witnesses[permutation[i]] = tuple(w for _, w in pairs)
    return tuple(out), witnesses


def _encode_rows(rows, schemes) -> tuple:
    return tuple(tuple(scheme.encode(ct) for scheme, ct in zip(schemes, row)) for row in rows)


def challenge_bits(count: int, *parts) -> list[int]:
    bits = []
    counter = 0
    while len(bits) < count:
        block = int.from_bytes(sha256("mix-challenge", counter, *parts), "big")
        bits.extend((block >> i) & 1 for i in range(256))
        counter += 1
    return bits[:count]


def _server_challenge(label, server, inputs, outputs, shadow_rows, schemes) -> list[int]:
    return challenge_bits(
        len(shadow_rows),
        label,
        server,
        _encode_rows(inputs, schemes),
        _encode_rows(outputs, schemes),
        tuple(_encode_rows(rows, schemes) for rows in shadow_rows),
    )


def _random_permutation(n: int, rng: Drbg) -> list[int]:
    permutation = list(range(n))
    rng.shuffle(permutation)
    return permutation


def _mix_one(server: MixServer, rows, schemes, rng: Drbg, label: str, rounds: int):
    n = len(rows)
    permutation = list(server.permutation) if server.permutation is not None else None
    if permutation is None:
        permutation = _random_permutation(n, rng)
    elif sorted(permutation) != list(range(n)):
        raise MixError("Forced permutation is not a permutation", server=server.name)

    outputs, out_witnesses = _shuffle(rows, permutation, schemes, rng, server.zero_randomness)

    shadows = []
    for _ in range(rounds):
        sigma = _random_permutation(n, rng)
        shadow_rows, shadow_witnesses = _shuffle(rows, sigma, schemes, rng)
        shadows.append((sigma, shadow_rows, shadow_witnesses))

    bits = _server_challenge(
        label, server.name, rows, outputs, [s[1] for s in shadows], schemes
    )

    rounds_out = []
    for bit, (sigma, shadow_rows, shadow_witnesses) in zip(bits, shadows):
        if bit == 0:
            mapping = tuple(sigma)
            openings = tuple(
                tuple(
                    scheme.link(src, dst, None, w)
                    for scheme, src, dst, w in zip(
                        schemes, rows[i], shadow_rows[sigma[i]], shadow_witnesses[sigma[i]]
                    )
                )
                for i in range(n)
            )
        else:
            inverse = [0] * n
            for i, j in enumerate(sigma):
                inverse[j] = i
            mapping = tuple(permutation[inverse[j]] for j in range(n))
            openings = tuple(
                tuple(
                    scheme.link(src, dst, w_src, w_dst)
                    for scheme, src, dst, w_src, w_dst in zip(
                        schemes,
                        shadow_rows[j],
                        outputs[mapping[j]],
                        shadow_witnesses[j],
                        out_witnesses[mapping[j]],
                    )
                )
                for j in range(n)
            )
        rounds_out.append(
            ShadowRound(rows=shadow_rows, bit=bit, mapping=mapping, openings=openings)
        )

    proof = ServerProof(
        server=server.name, inputs=rows, outputs=outputs, shadows=tuple(rounds_out)
    )
    return proof, permutation


def mix(
    servers,
    columns,
    schemes,
    rng: Drbg,
    label: str = "",
    shadow_rounds: int = DEFAULT_SHADOW_ROUNDS,
) -> MixBatch:
    """
    Mix the given equal-length columns through every server in order.
    """
    if not servers:
        raise MixError("At least one mix server is required")
    rows = _columns_to_rows(columns, schemes)
    inputs = rows
    composed = list(range(len(rows)))
    proofs = []
    for server in servers:
        proof, permutation = _mix_one(
            server, rows, schemes, rng.child(server.name), label, shadow_rounds
        )
        composed = [permutation[position] for position in composed]
        proofs.append(proof)
        rows = proof.outputs
        logger.debug(
            f"Mix server {server.name} done",
            extra={"server": server.name, "rows": len(rows), "label": label},
        )
    return MixBatch(
        inputs=inputs,
        outputs=rows,
        servers=tuple(proofs),
        label=label,
        permutation=tuple(composed),
    )


def verify_mix(batch: MixBatch, schemes, shadow_rounds: int | None = None) -> bool:
    """Public check of server chaining, challenge bits and every opening."""
    if not batch.servers:
        return False
    if batch.servers[0].inputs != batch.inputs or batch.servers[-1].outputs != batch.outputs:
        return False
    for previous, current in zip(batch.servers, batch.servers[1:]):
        if previous.outputs != current.inputs:
            return False
    for proof in batch.servers:
        if not _verify_server(proof, schemes, batch.label, shadow_rounds):
            logger.warning(
                f"Mix proof of {proof.server} rejected",
                extra={"server": proof.server, "label": batch.label},
            )
            return False
    return True


def _verify_server(proof: ServerProof, schemes, label: str, shadow_rounds: int | None) -> bool:
    n = len(proof.inputs)
    width = len(schemes)
    if len(proof.outputs) != n:
        return False
    if not proof.shadows:
        return False
    if shadow_rounds is not None and len(proof.shadows) != shadow_rounds:
        return False
    for row in proof.inputs + proof.outputs:
        if len(row) != width:
            return False

    bits = _server_challenge(
        label, proof.server, proof.inputs, proof.outputs, [s.rows for s in proof.shadows], schemes
    )
    for bit, shadow in zip(bits, proof.shadows):
        if shadow.bit != bit or len(shadow.rows) != n or len(shadow.openings) != n:
            return False
        if sorted(shadow.mapping) != list(range(n)):
            return False
        for k in range(n):
            if bit == 0:
                sources, targets = proof.inputs[k], shadow.rows[shadow.mapping[k]]
            else:
                sources, targets = shadow.rows[k], proof.outputs[shadow.mapping[k]]
            if len(targets) != width or len(shadow.openings[k]) != width:
                return False
            for scheme, src, dst, opening in zip(schemes, sources, targets, shadow.openings[k]):
                if not scheme.verify_link(src, dst, opening):
                    return False
    return True
