"""
Tests for election setup, registration and voting.
"""
from collections import Counter

import pytest

from apps.board.board import verify_chain
from apps.board.models import EntryKind
from apps.core.exceptions import ChoiceNotInSlateError, ConfigurationError, ElectionError
from apps.crypto.group import GroupParams
from apps.crypto.nizk import ProofContext, verify_ballot
from apps.election.models import Ballot, BallotReceipt, ElectionConfig, RollEntry
from apps.election.protocol import Election, verify_recorded
from apps.fhe.oracle import verify_attestation


def _proof_verifies(election, ballot, ctx=None):
    return verify_ballot(
        election.public,
        ballot.vote,
        ballot.credential,
        election.slate,
        ballot.proof,
        ctx or election.ctx,
    )


class TestSetup:
    """Tests for posting public parameters."""

    def test_classical_parameters_posted(self, make_election):
        election = make_election("quadratic")
        transcript = election.transcript()

        group = transcript.params_entry("group").data
        assert GroupParams.from_dict(group) == election.params
        assert transcript.params_entry("tallier-key").data["t"] == 2
        assert transcript.params_entry("election").data["config"]["backend"] == "quadratic"
        assert len(election.slate) == 3
        assert verify_chain(transcript)

    def test_seed_stays_private(self, make_election):
        election = make_election("smith_weber")
        config = election.transcript().params_entry("election").data["config"]
        assert "seed" not in config
        assert ElectionConfig.from_public(config).election_id == election.config.election_id

    def test_fhe_parameters_posted(self, make_election):
        election = make_election("linear")
        transcript = election.transcript()

        fhe_key = transcript.params_entry("fhe-key")
        assert fhe_key.author == "oracle"
        assert fhe_key.data["verify_key"] == election.oracle.verify_key
        assert transcript.params_entry("group") is None
        assert election.slate == ("alice", "bob", "carol")

    def test_eligibility_needs_linear_backend(self, make_election):
        with pytest.raises(ConfigurationError):
            make_election("quadratic", eligibility=True)

    def test_no_candidates(self, make_config):
        with pytest.raises(ConfigurationError):
            Election(make_config(candidates=()))

    def test_registration_before_setup(self, make_config):
        with pytest.raises(ElectionError):
            Election(make_config()).register(1)


class TestRegistration:
    def test_roll_entries_rotate_registrars(self, make_election):
        election = make_election("quadratic")

        voters = election.register(3)

        rolls = election.transcript().query(EntryKind.ROLL)
        assert [entry.author for entry in rolls] == ["registrar-0", "registrar-1", "registrar-0"]
        assert [voter.roll_index for voter in voters] == [entry.index for entry in rolls]

    def test_roll_encrypts_the_credential(self, make_election, backend):
        """Test each roll ciphertext opens to the voter's credential."""
        election = make_election(backend)
        voters = election.register(2)

        for voter, entry in zip(voters, election.transcript().query(EntryKind.ROLL)):
            roll = RollEntry.from_payload(entry.data)
            assert roll.voter == voter.index
            assert election.open_ciphertext(roll.ciphertext) == voter.credential.sigma

    def test_fake_credentials_look_real(self, make_election):
        election = make_election("quadratic")
        (voter,) = election.register(1)
        fake = election.fake_credential()

        assert fake.key != voter.credential.key
        assert election.params.contains(fake.sigma)

    def test_fake_credential_bytes_are_uniform(self, make_election):
        """Test a thousand fake credentials spread evenly over byte values, like real ones."""
        election = make_election("linear")
        fakes = b"".join(election.fake_credential().sigma for _ in range(1000))
        reals = b"".join(election.new_credential().sigma for _ in range(1000))

        for sample in (fakes, reals):
            expected = len(sample) / 256
            counts = Counter(sample)
            chi_square = sum((counts[b] - expected) ** 2 / expected for b in range(256))
            # 255 degrees of freedom; 350 is roughly four standard deviations out
            assert chi_square < 350
        assert set(fakes[i : i + 32] for i in range(0, len(fakes), 32)).isdisjoint(
            reals[i : i + 32] for i in range(0, len(reals), 32)
        )

    def test_eligibility_credentials_have_preimages(self, make_election):
        from apps.fhe.oracle import credential_hash

        election = make_election("linear", eligibility=True)
        (voter,) = election.register(1)

        assert credential_hash(voter.credential.preimage) == voter.credential.sigma


class TestVoting:
    """Tests for casting ballots."""

    def test_ballot_proof_verifies(self, make_election):
        election = make_election("quadratic")
        (voter,) = election.register(1)

        receipt = election.cast_vote(voter.credential, "bob")

        entry = election.transcript().entries[receipt.index]
        ballot = Ballot.from_payload(entry.data)
        assert entry.author == "anonymous"
        assert _proof_verifies(election, ballot)
        assert election.open_ciphertext(ballot.vote) == election.slate[1]

    def test_invalid_proof_ballot(self, make_election):
        election = make_election("smith_weber")
        (voter,) = election.register(1)

        receipt = election.cast_invalid_proof(voter.credential, "alice")

        ballot = Ballot.from_payload(election.transcript().entries[receipt.index].data)
        assert not _proof_verifies(election, ballot)
        foreign = ProofContext(election_id=election.config.election_id + b"/forged")
        assert _proof_verifies(election, ballot, foreign)

    def test_fhe_ballot_attested(self, make_election):
        election = make_election("linear")
        (voter,) = election.register(1)

        receipt = election.cast_vote(voter.credential, "carol")

        ballot = Ballot.from_payload(election.transcript().entries[receipt.index].data)
        assert verify_attestation(ballot.proof, election.oracle.verify_key)
        assert ballot.proof.context == election.config.election_id.hex()
        assert election.open_ciphertext(ballot.vote) == b"carol"

    def test_choice_not_in_slate(self, make_election):
        election = make_election("quadratic")
        (voter,) = election.register(1)
        with pytest.raises(ChoiceNotInSlateError):
            election.cast_vote(voter.credential, "mallory")

    def test_coercion_posts_two_ballots(self, make_election):
        election = make_election("quadratic")
        (voter,) = election.register(1)

        outcome = election.cast_coerced(voter, "alice", "carol")

        assert outcome.fake_receipt.index < outcome.real_receipt.index
        assert outcome.fake_credential.key != voter.credential.key

    def test_stuffing_only_in_eligibility_mode(self, make_election):
        election = make_election("linear")
        (voter,) = election.register(1)
        with pytest.raises(ConfigurationError):
            election.cast_stuffed(voter, "alice")


class TestReceipts:
    def test_receipt_verifies(self, make_election):
        election = make_election("quadratic")
        (voter,) = election.register(1)
        receipt = election.cast_vote(voter.credential, "alice")

        assert verify_recorded(election.board, receipt)
        assert verify_recorded(election.transcript(), receipt)

    def test_receipt_for_other_entry_fails(self, make_election):
        election = make_election("quadratic")
        (voter,) = election.register(1)
        receipt = election.cast_vote(voter.credential, "alice")
        other = election.cast_vote(voter.credential, "bob")

        moved = BallotReceipt(other.index, receipt.entry_hash, receipt.payload_digest)

        assert not verify_recorded(election.board, moved)

    def test_receipt_out_of_range(self, make_election):
        election = make_election("quadratic")
        assert not verify_recorded(election.board, BallotReceipt(99, "00", "00"))


class TestDeterminism:
    def test_same_seed_same_board(self, make_config, tmp_path):
        """Test two runs with one config write byte-identical transcripts."""
        config = make_config(backend="smith_weber")
        paths = [tmp_path / "first.jsonl", tmp_path / "second.jsonl"]
        for path in paths:
            election = Election(config, path).setup()
            (voter,) = election.register(1)
            election.cast_vote(voter.credential, "bob")

        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestCredentials:
    @pytest.mark.parametrize("backend", ["quadratic", "linear"])
    def test_credentials_are_distinct(self, make_election, backend):
        election = make_election(backend)
        sigmas = {election.new_credential().sigma for _ in range(200)}
        assert len(sigmas) == 200

    @pytest.mark.slow
    def test_no_collisions_at_scale(self, make_election):
        """Test ten thousand credentials from one stream never collide."""
        election = make_election("quadratic")
        sigmas = {election.new_credential().sigma for _ in range(10_000)}
        assert len(sigmas) == 10_000
