"""
Tests for the verifiable re-encryption mix.
"""
import itertools
from collections import Counter
from dataclasses import replace

import pytest

from apps.core.exceptions import MixError
from apps.crypto import elgamal
from apps.crypto.elgamal import KeyPair
from apps.fhe.models import PlaintextTag
from apps.mixnet.mix import MixBatch, MixServer, mix, verify_mix
from apps.mixnet.schemes import ElGamalScheme, FheScheme


@pytest.fixture
def plaintexts(group64):
    return [group64.exp(group64.g1, k) for k in (3, 3, 5, 8, 13)]


@pytest.fixture
def column(keypair, plaintexts):
    return [elgamal.encrypt(keypair.public, m, 100 + i) for i, m in enumerate(plaintexts)]


@pytest.fixture
def schemes(keypair):
    return [ElGamalScheme(keypair.public)]


def _servers(count=2):
    return [MixServer(f"mix-{i}") for i in range(count)]


class TestMix:
    """Tests for mixing and public verification."""

    def test_plaintext_multiset_preserved(self, keypair, column, plaintexts, schemes, rng):
        batch = mix(_servers(), [column], schemes, rng, label="votes", shadow_rounds=8)

        outputs = [elgamal.decrypt(keypair, ct) for ct in batch.column(0)]

        assert Counter(outputs) == Counter(plaintexts)
        assert set(batch.column(0)).isdisjoint(column)
        assert verify_mix(batch, schemes, shadow_rounds=8)

    def test_permutation_maps_inputs_to_outputs(self, keypair, column, schemes, rng):
        batch = mix(_servers(3), [column], schemes, rng, shadow_rounds=4)

        for i, ct in enumerate(column):
            out = batch.outputs[batch.permutation[i]][0]
            assert elgamal.decrypt(keypair, out) == elgamal.decrypt(keypair, ct)

    def test_forced_permutation_without_randomness(self, column, schemes, rng):
        """Test a forced identity re-encryption places inputs exactly where told."""
        server = MixServer("mix-0", permutation=[2, 0, 1, 4, 3], zero_randomness=True)

        batch = mix([server], [column], schemes, rng, shadow_rounds=4)

        assert batch.permutation == (2, 0, 1, 4, 3)
        for i, ct in enumerate(column):
            assert batch.outputs[batch.permutation[i]][0] == ct
        assert verify_mix(batch, schemes, shadow_rounds=4)

    def test_composed_permutation(self, column, schemes, rng):
        servers = [
            MixServer("mix-0", permutation=[1, 2, 3, 4, 0], zero_randomness=True),
            MixServer("mix-1", permutation=[4, 0, 1, 2, 3], zero_randomness=True),
        ]

        batch = mix(servers, [column], schemes, rng, shadow_rounds=2)

        assert batch.permutation == (0, 1, 2, 3, 4)
        assert batch.column(0) == column

    def test_rows_move_together(self, keypair, group64, schemes, rng):
        """Test paired columns share one permutation."""
        votes = [elgamal.encrypt(keypair.public, group64.exp(group64.g1, k), k) for k in (1, 2, 3)]
        creds = [elgamal.encrypt(keypair.public, group64.exp(group64.g2, k), k) for k in (1, 2, 3)]
        pair = schemes * 2

        batch = mix(_servers(), [votes, creds], pair, rng, shadow_rounds=4)

        for vote, cred in batch.outputs:
            v = elgamal.decrypt(keypair, vote)
            c = elgamal.decrypt(keypair, cred)
            k = next(k for k in (1, 2, 3) if group64.exp(group64.g1, k) == v)
            assert c == group64.exp(group64.g2, k)
        assert verify_mix(batch, pair, shadow_rounds=4)

    def test_empty_columns(self, schemes, rng):
        batch = mix(_servers(), [[]], schemes, rng, shadow_rounds=4)
        assert batch.outputs == ()
        assert verify_mix(batch, schemes)


class TestVerification:
    """Tests for rejecting bad mixes."""

    def test_swapped_output_rejected(self, keypair, column, schemes, rng):
        batch = mix(_servers(1), [column], schemes, rng, shadow_rounds=8)
        forged = elgamal.encrypt(keypair.public, keypair.params.g2, 7)
        outputs = ((forged,),) + batch.outputs[1:]
        proof = replace(batch.servers[0], outputs=outputs)

        tampered = replace(batch, outputs=outputs, servers=(proof,))

        assert not verify_mix(tampered, schemes)

    def test_broken_server_chain_rejected(self, column, schemes, rng):
        batch = mix(_servers(2), [column], schemes, rng, shadow_rounds=4)
        first, second = batch.servers

        tampered = replace(batch, servers=(first, replace(second, inputs=first.inputs)))

        assert not verify_mix(tampered, schemes)

    def test_wrong_round_count_rejected(self, column, schemes, rng):
        batch = mix(_servers(1), [column], schemes, rng, shadow_rounds=4)
        assert not verify_mix(batch, schemes, shadow_rounds=8)

    def test_server_without_shadows_rejected(self, column, schemes, rng):
        """Test a server proof with no shadow rounds proves nothing."""
        batch = mix(_servers(1), [column], schemes, rng, shadow_rounds=4)
        proof = replace(batch.servers[0], shadows=())

        assert not verify_mix(replace(batch, servers=(proof,)), schemes)

    def test_no_servers_rejected(self, column, schemes, rng):
        batch = mix(_servers(1), [column], schemes, rng, shadow_rounds=4)
        assert not verify_mix(replace(batch, servers=()), schemes)

    def test_posted_form_verifies(self, column, schemes, rng):
        batch = mix(_servers(), [column], schemes, rng, label="roll", shadow_rounds=4)

        reloaded = MixBatch.from_dict(batch.to_dict(schemes), schemes)

        assert reloaded == batch
        assert verify_mix(reloaded, schemes, shadow_rounds=4)

    def test_posted_form_with_other_columns_refused(self, column, schemes, rng):
        batch = mix(_servers(1), [column], schemes, rng, shadow_rounds=2)
        with pytest.raises(MixError):
            MixBatch.from_dict(batch.to_dict(schemes), schemes * 2)


class TestInputErrors:
    def test_unequal_columns(self, column, schemes, rng):
        with pytest.raises(MixError):
            mix(_servers(), [column, column[:2]], schemes * 2, rng)

    def test_scheme_per_column(self, column, schemes, rng):
        with pytest.raises(MixError):
            mix(_servers(), [column, column], schemes, rng)

    def test_needs_a_server(self, column, schemes, rng):
        with pytest.raises(MixError):
            mix([], [column], schemes, rng)

    def test_forced_permutation_checked(self, column, schemes, rng):
        with pytest.raises(MixError):
            mix([MixServer("mix-0", permutation=[0, 0, 1, 2, 3])], [column], schemes, rng)


class TestFheColumns:
    """Tests for mixing oracle ciphertexts alongside ElGamal ones."""

    def test_fhe_and_elgamal_columns(self, oracle, approvals, keypair, column, schemes, rng):
        credentials = [
            oracle.encrypt(f"sigma-{i}".encode(), PlaintextTag.CREDENTIAL)
            for i in range(len(column))
        ]
        pair = [FheScheme(oracle, oracle.verify_key), *schemes]

        batch = mix(_servers(), [credentials, column], pair, rng, shadow_rounds=4)

        assert verify_mix(batch, pair, shadow_rounds=4)
        opened = {
            oracle.threshold_decrypt(ct, approvals.approvals(ct)).plaintext
            for ct in batch.column(0)
        }
        assert opened == {f"sigma-{i}".encode() for i in range(len(column))}

    def test_fhe_verification_needs_oracle_key(self, oracle, keypair, column, schemes, rng):
        credentials = [oracle.encrypt(b"sigma", PlaintextTag.CREDENTIAL) for _ in column]
        pair = [FheScheme(oracle, oracle.verify_key), *schemes]
        batch = mix(_servers(1), [credentials, column], pair, rng, shadow_rounds=4)

        other = [FheScheme(None, "00" * 32), *schemes]

        assert not verify_mix(batch, other, shadow_rounds=4)


class TestTinyGroup:
    """Exhaustive checks in the p = 23 group."""

    @pytest.mark.parametrize("permutation", list(itertools.permutations(range(3))))
    def test_every_permutation(self, tiny_group, rng, permutation):
        sk = KeyPair.from_secrets(tiny_group, 3, 5)
        schemes = [ElGamalScheme(sk.public)]
        plaintexts = [2, 3, 4]
        column = [elgamal.encrypt(sk.public, m, r) for m, r in zip(plaintexts, (1, 2, 3))]

        server = MixServer("mix-0", permutation=list(permutation))

        batch = mix([server], [column], schemes, rng, shadow_rounds=4)

        assert batch.permutation == permutation
        for i, m in enumerate(plaintexts):
            assert elgamal.decrypt(sk, batch.outputs[permutation[i]][0]) == m
        assert verify_mix(batch, schemes, shadow_rounds=4)
