"""
Tests for config loading, scenario generation and the plaintext ground truth.
"""
import pytest

from apps.core.exceptions import ConfigurationError
from apps.election.models import Backend, DuplicatePolicy
from apps.election.scenario import expected_tally, generate_scenario
from apps.election.serializers import ElectionConfigSerializer, load_config

from .factories import CastRecordFactory


class TestExpectedTally:
    """Tests for the bookkeeping-only tally."""

    def test_keep_last_counts_the_revote(self, make_config):
        ledger = [
            CastRecordFactory(board_index=3, credential_key="v1", choice="alice"),
            CastRecordFactory(board_index=4, credential_key="v2", choice="bob"),
            CastRecordFactory(board_index=5, credential_key="v1", choice="carol"),
        ]

        counts, removals, surviving = expected_tally(ledger, make_config())

        assert counts == {"alice": 0, "bob": 1, "carol": 1}
        assert removals["duplicates_removed"] == 1
        assert surviving == (4, 5)

    def test_keep_first(self, make_config):
        ledger = [
            CastRecordFactory(board_index=3, credential_key="v1", choice="alice"),
            CastRecordFactory(board_index=5, credential_key="v1", choice="carol"),
        ]
        config = make_config(duplicate_policy=DuplicatePolicy.KEEP_FIRST)

        counts, _, surviving = expected_tally(ledger, config)

        assert counts["alice"] == 1 and counts["carol"] == 0
        assert surviving == (3,)

    def test_removal_order(self, make_config):
        """Test bad proofs go first, then duplicates, then unregistered credentials."""
        ledger = [
            CastRecordFactory(board_index=1, credential_key="v1", proof_valid=False),
            CastRecordFactory(board_index=2, credential_key="fake", registered=False),
            CastRecordFactory(board_index=3, credential_key="fake", registered=False),
            CastRecordFactory(board_index=4, credential_key="v1", choice="bob"),
        ]

        counts, removals, _ = expected_tally(ledger, make_config())

        assert removals == {
            "proof_rejected": 1,
            "stuffing_flagged": 0,
            "duplicates_removed": 1,
            "invalid_removed": 1,
        }
        assert counts["bob"] == 1

    def test_stuffing_only_counts_in_eligibility_mode(self, make_config):
        ledger = [CastRecordFactory(eligible=False), CastRecordFactory()]

        _, plain, _ = expected_tally(ledger, make_config())
        _, strict, _ = expected_tally(
            ledger, make_config(backend=Backend.LINEAR, eligibility=True)
        )

        assert plain["stuffing_flagged"] == 0
        assert strict["stuffing_flagged"] == 1

    def test_every_candidate_listed(self, make_config):
        counts, _, surviving = expected_tally([], make_config())
        assert counts == {"alice": 0, "bob": 0, "carol": 0}
        assert surviving == ()


class TestGenerateScenario:
    def test_ballot_mix(self, make_scenario):
        scenario = make_scenario("quadratic", bad_proof=1)
        labels = [record.label for record in scenario.ledger]

        assert scenario.roll_size == 5
        assert labels.count("honest") == 4
        assert labels.count("duplicate") == 1
        assert labels.count("invalid") == 1
        assert labels.count("coerced-fake") == labels.count("coerced-real") == 1
        assert labels.count("bad-proof") == 1
        assert len(scenario.coercions) == 1
        assert scenario.removals["proof_rejected"] == 1
        assert scenario.removals["duplicates_removed"] == 1
        # the coercer's fake ballot and the unregistered one
        assert scenario.removals["invalid_removed"] == 2
        assert sum(scenario.expected.values()) == 5

    def test_same_config_same_plan(self, make_config):
        """Test the ballot plan depends only on the seed and election id."""
        config = make_config()
        first = generate_scenario(3, 1, 1, 1, config)
        second = generate_scenario(3, 1, 1, 1, config.with_backend(Backend.SMITH_WEBER))

        assert [(r.label, r.choice) for r in first.ledger] == [
            (r.label, r.choice) for r in second.ledger
        ]
        assert first.expected == second.expected

    def test_seed_override(self, make_config):
        config = make_config()
        scenario = generate_scenario(2, 0, 0, 0, config, seed=42)
        assert scenario.election.config.seed == b"42"

    def test_ground_truth(self, make_scenario):
        truth = make_scenario("smith_weber").ground_truth()
        assert set(truth) == {
            "counts",
            "proof_rejected",
            "stuffing_flagged",
            "duplicates_removed",
            "invalid_removed",
            "surviving",
        }

    @pytest.mark.parametrize(
        "counts",
        [(-1, 0, 0, 0), (1, 2, 0, 0)],
    )
    def test_invalid_counts(self, make_config, counts):
        with pytest.raises(ConfigurationError):
            generate_scenario(*counts, make_config())

    def test_stuffed_needs_eligibility(self, make_config):
        with pytest.raises(ConfigurationError):
            generate_scenario(2, 0, 0, 0, make_config(), n_stuffed=1)


class TestLoadConfig:
    """Tests for validating config files."""

    def test_defaults_fill_in(self, settings):
        config, scenario = load_config({"election_id": "demo", "seed": 7})

        assert config.election_id == b"demo"
        assert config.seed == b"7"
        assert config.candidates == tuple(settings.ELECTION_DEFAULTS["candidates"])
        assert scenario["honest"] == 10

    def test_scenario_block(self):
        config, scenario = load_config(
            {
                "election_id": "demo",
                "backend": "smith_weber",
                "scenario": {"honest": 5, "duplicate": 2, "coerced": 1},
            }
        )

        assert config.backend == Backend.SMITH_WEBER
        assert scenario["duplicate"] == 2
        assert scenario["invalid"] == 0
        assert scenario["honest"] == 5

    def test_scenario_is_a_declared_field(self):
        assert "scenario" in ElectionConfigSerializer().fields

    @pytest.mark.parametrize(
        "data, field",
        [
            ({"election_id": "e", "threshold": 4, "talliers": 3}, "threshold"),
            ({"election_id": "e", "eligibility": True, "backend": "quadratic"}, "eligibility"),
            ({"election_id": "e", "scenario": {"stuffed": 1}}, "scenario"),
            ({"election_id": "e", "candidates": ["a", "a"]}, "candidates"),
            ({"election_id": "e", "backend": "cubic"}, "backend"),
            ({"election_id": "e", "scenario": {"honest": 1, "duplicate": 3}}, "scenario"),
            ({}, "election_id"),
        ],
    )
    def test_rejected(self, data, field):
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(data)
        assert field in excinfo.value.details["errors"]
