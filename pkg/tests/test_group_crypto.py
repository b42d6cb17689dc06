"""
Tests for the group, ElGamal, threshold decryption and PETs.
"""
from dataclasses import replace
from itertools import combinations

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from apps.core.drbg import Drbg
from apps.core.exceptions import (
    DegenerateKeyError,
    EncodingError,
    InvalidGroupError,
    InvalidShareError,
    ParameterSearchError,
)
from apps.crypto import elgamal
from apps.crypto.elgamal import KeyPair
from apps.crypto.group import generate_params, metering, validate_params
from apps.crypto.pet import pet, verify_pet
from apps.crypto.threshold import (
    TallierPanel,
    deal_shares,
    reconstruct,
    verify_decryption,
)

TINY = validate_params(23, 11, 4, 9)
SUBGROUP = sorted({TINY.exp(TINY.g1, k) for k in range(TINY.q)})

scalars = st.integers(min_value=0, max_value=TINY.q - 1)
elements = st.sampled_from(SUBGROUP)


class TestGroupParams:
    """Tests for group parameters."""

    def test_tiny_group_membership(self, tiny_group):
        """Test membership is the quadratic-residue check."""
        assert tiny_group == TINY
        assert len(SUBGROUP) == 11
        assert all(tiny_group.contains(e) for e in SUBGROUP)
        assert not tiny_group.contains(5)
        assert not tiny_group.contains(0)
        assert not tiny_group.contains(23)

    def test_rejects_non_generator(self):
        """Test a generator outside the subgroup is refused."""
        with pytest.raises(InvalidGroupError):
            validate_params(23, 11, 5, 9)

    def test_rejects_non_safe_prime(self):
        with pytest.raises(InvalidGroupError):
            validate_params(29, 14, 4, 9)

    def test_rejects_equal_generators(self):
        with pytest.raises(InvalidGroupError):
            validate_params(23, 11, 4, 4)

    def test_generation_is_deterministic(self, group64):
        """Test the same seed gives the same group."""
        again = generate_params(64, b"test-group")

        assert again == group64
        assert group64.p.bit_length() == 64
        assert group64.p == 2 * group64.q + 1
        assert group64.contains(group64.g1) and group64.contains(group64.g2)

    def test_different_seed_gives_different_generators(self, group64):
        other = generate_params(64, b"other-seed")
        assert (other.g1, other.g2) != (group64.g1, group64.g2)

    def test_search_gives_up(self):
        with pytest.raises(ParameterSearchError):
            generate_params(40, b"seed", max_attempts=0)

    def test_minimum_bit_length(self):
        with pytest.raises(InvalidGroupError):
            generate_params(8, b"seed")

    def test_round_trip_through_dict(self, group64):
        assert type(group64).from_dict(group64.to_dict()) == group64

    def test_exponent_reduced_mod_q(self, tiny_group):
        assert tiny_group.exp(tiny_group.g1, tiny_group.q + 3) == tiny_group.exp(tiny_group.g1, 3)

    def test_metering_counts_exponentiations(self, group64):
        """Test exponentiations are counted only inside the block."""
        group64.exp(group64.g1, 5)
        with metering() as meter:
            group64.exp(group64.g1, 5)
            group64.exp(group64.g2, 7)
        group64.exp(group64.g1, 9)

        assert meter.count == 2


class TestElGamal:
    """Tests for two-generator ElGamal."""

    @given(x1=scalars, x2=scalars, m=elements, r=scalars)
    def test_decrypt_inverts_encrypt(self, x1, x2, m, r):
        """Test decryption recovers every subgroup plaintext."""
        try:
            sk = KeyPair.from_secrets(TINY, x1, x2)
        except DegenerateKeyError:
            assume(False)
        assert elgamal.decrypt(sk, elgamal.encrypt(sk.public, m, r)) == m

    @given(m1=elements, m2=elements, r1=scalars, r2=scalars, s=scalars)
    def test_multiplicative_homomorphism(self, m1, m2, r1, r2, s):
        """Test products and re-encryptions keep plaintext relations."""
        sk = KeyPair.from_secrets(TINY, 3, 5)
        a = elgamal.encrypt(sk.public, m1, r1)
        b = elgamal.encrypt(sk.public, m2, r2)

        assert elgamal.decrypt(sk, elgamal.multiply(TINY, a, b)) == TINY.mul(m1, m2)
        assert elgamal.decrypt(sk, elgamal.quotient(TINY, a, b)) == TINY.div(m1, m2)
        assert elgamal.decrypt(sk, elgamal.reencrypt(sk.public, a, s)) == m1

    def test_hand_example(self, tiny_group):
        """Test a fully worked example in the p = 23 group."""
        sk = KeyPair.from_secrets(tiny_group, 2, 3)
        # h = 4^2 * 9^3 = 16 * 16 = 256 = 3 mod 23
        assert sk.h == 3

        ct = elgamal.encrypt(sk.public, 8, 1)
        assert ct.components() == (4, 9, 8 * 3 % 23)
        assert elgamal.decrypt(sk, ct) == 8

    def test_reference_values(self, tiny_group):
        sk = KeyPair.from_secrets(tiny_group, 3, 5)
        assert sk.h == 6

        ct = elgamal.encrypt(sk.public, 2, 7)
        moved = elgamal.reencrypt(sk.public, ct, 2)

        assert ct.components() == (8, 4, 6)
        assert moved.components() == (13, 2, 9)
        assert elgamal.decrypt(sk, ct) == elgamal.decrypt(sk, moved) == 2

    def test_degenerate_key_rejected(self, tiny_group):
        with pytest.raises(DegenerateKeyError):
            KeyPair.from_secrets(tiny_group, 0, 0)

    def test_plaintext_outside_subgroup_rejected(self, tiny_group):
        sk = KeyPair.from_secrets(tiny_group, 2, 3)
        with pytest.raises(EncodingError):
            elgamal.encrypt(sk.public, 5, 1)

    def test_ciphertext_list_round_trip(self, keypair):
        ct = elgamal.encrypt(keypair.public, keypair.params.g1, 12345)
        assert type(ct).from_list(ct.to_list()) == ct
        assert elgamal.is_well_formed(keypair.params, ct)


class TestThreshold:
    """Tests for threshold sharing and distributed decryption."""

    def test_every_quorum_reconstructs(self, tiny_group):
        """Test any t of n shares give back the secret scalars."""
        sk = KeyPair.from_secrets(tiny_group, 4, 7)
        shares = deal_shares(sk, 3, 5, Drbg(b"dealer"))

        for subset in combinations(shares.shares, 3):
            assert reconstruct(tiny_group, subset) == (4, 7)

    def test_commitments_match_shares(self, tiny_group):
        sk = KeyPair.from_secrets(tiny_group, 4, 7)
        shares = deal_shares(sk, 2, 3, Drbg(b"dealer"))
        for share in shares.shares:
            expected = tiny_group.mul(
                tiny_group.exp(tiny_group.g1, share.x1), tiny_group.exp(tiny_group.g2, share.x2)
            )
            assert share.commitment == expected

    @pytest.mark.parametrize("t, n", [(0, 3), (4, 3)])
    def test_threshold_out_of_range(self, tiny_group, t, n):
        sk = KeyPair.from_secrets(tiny_group, 4, 7)
        with pytest.raises(InvalidShareError):
            deal_shares(sk, t, n, Drbg(b"dealer"))

    def test_panel_decryption_verifies(self, panel, keypair, ctx):
        """Test a quorum decrypts with proofs anyone can check."""
        m = keypair.params.exp(keypair.params.g1, 42)
        ct = elgamal.encrypt(keypair.public, m, 99)

        transcript = panel.decrypt(ct, ctx)

        assert transcript.plaintext == m
        assert len(transcript.shares) == 2
        assert panel.verify(transcript, ctx)

    def test_other_quorum_decrypts(self, keypair, rng, ctx):
        shares = deal_shares(keypair, 2, 3, rng.child("dealer"))
        panel = TallierPanel(shares, rng.child("talliers"), quorum=(1, 3))
        m = keypair.params.exp(keypair.params.g1, 7)

        transcript = panel.decrypt(elgamal.encrypt(keypair.public, m, 5), ctx)

        assert transcript.plaintext == m
        assert [share.index for share in transcript.shares] == [1, 3]

    def test_tampered_decryption_rejected(self, panel, keypair, ctx):
        params = keypair.params
        ct = elgamal.encrypt(keypair.public, params.g1, 11)
        transcript = panel.decrypt(ct, ctx)

        wrong_plaintext = replace(transcript, plaintext=params.g2)
        too_few = replace(transcript, shares=transcript.shares[:1])

        assert not verify_decryption(params, panel.commitments, 2, wrong_plaintext, ctx)
        assert not verify_decryption(params, panel.commitments, 2, too_few, ctx)
        assert not panel.verify(transcript, ctx.bind("other-statement"))


class TestPet:
    """Tests for the distributed plaintext equivalence test."""

    def test_equal_plaintexts_match(self, panel, keypair, ctx):
        params = keypair.params
        m = params.exp(params.g1, 1234)
        a = elgamal.encrypt(keypair.public, m, 17)
        b = elgamal.encrypt(keypair.public, m, 29)

        transcript = pet(panel, a, b, ctx)

        assert transcript.verdict
        assert transcript.valid
        assert verify_pet(params, panel.commitments, 2, transcript, ctx)

    def test_different_plaintexts_do_not_match(self, panel, keypair, ctx):
        params = keypair.params
        a = elgamal.encrypt(keypair.public, params.exp(params.g1, 3), 17)
        b = elgamal.encrypt(keypair.public, params.exp(params.g1, 4), 19)

        transcript = pet(panel, a, b, ctx)

        assert not transcript.verdict
        assert verify_pet(params, panel.commitments, 2, transcript, ctx)

    def test_flipped_verdict_rejected(self, panel, keypair, ctx):
        params = keypair.params
        a = elgamal.encrypt(keypair.public, params.exp(params.g1, 3), 17)
        b = elgamal.encrypt(keypair.public, params.exp(params.g1, 4), 18)
        transcript = pet(panel, a, b, ctx)

        assert not verify_pet(
            params, panel.commitments, 2, replace(transcript, verdict=True), ctx
        )

    def test_posted_form_reloads(self, panel, keypair, ctx):
        """Test a posted PET is checkable from its payload and the two inputs."""
        params = keypair.params
        a = elgamal.encrypt(keypair.public, params.g1, 17)
        b = elgamal.encrypt(keypair.public, params.g1, 18)
        transcript = pet(panel, a, b, ctx)

        reloaded = type(transcript).from_dict(params, transcript.to_dict(), a, b)

        assert reloaded.verdict
        assert verify_pet(params, panel.commitments, 2, reloaded, ctx)
