"""
Tests for the three tallying backends.
"""
import pytest

from apps.board.models import EntryKind
from apps.core.exceptions import ElectionError, TallyAbortedError
from apps.election.models import DuplicatePolicy
from apps.tally.common import DisjointSet, match_roll, resolve_duplicates
from apps.tally.models import Stage, TallyResult
from apps.tally.quadratic import tally_quadratic
from apps.tally.runner import run_tally
from apps.tally.serializers import TallyResultSerializer


def _sizes(result, roll_size):
    """(n', n'', |L|) as seen by the weeding report."""
    return (
        len(result.weeding.survivors(Stage.PROOF_VALID)),
        len(result.weeding.survivors(Stage.DEDUPLICATED)),
        roll_size,
    )


class TestTallyMatchesGroundTruth:
    """Every backend reproduces the bookkeeping tally."""

    def test_counts(self, tallied):
        result = tallied.election.result

        assert result.counts == tallied.expected
        assert result.valid_count == sum(tallied.expected.values())

    def test_removal_counts(self, tallied):
        result = tallied.election.result
        for name, value in tallied.removals.items():
            assert getattr(result, name) == value, name
        assert result.spoiled == 0

    def test_surviving_ballots(self, tallied):
        """Test the counted ballots are exactly the expected board entries."""
        assert tallied.election.result.surviving == tallied.expected_surviving

    def test_coerced_choice_not_counted(self, tallied):
        """Test every coerced voter's real choice is counted in place of the coercer's."""
        surviving = set(tallied.election.result.surviving)
        for outcome in tallied.coercions:
            assert outcome.real_receipt.index in surviving
            assert outcome.fake_receipt.index not in surviving

    def test_result_posted_last(self, tallied):
        transcript = tallied.election.transcript()
        entry = transcript.entries[-1]

        assert entry.kind == EntryKind.RESULT
        assert TallyResult.from_payload(entry.data) == tallied.election.result
        assert tallied.election.result.board_length == len(transcript)

    def test_keep_first(self, make_scenario, backend):
        scenario = make_scenario(backend, duplicate=2, duplicate_policy=DuplicatePolicy.KEEP_FIRST)
        result = scenario.election.tally()

        assert result.counts == scenario.expected
        assert result.surviving == scenario.expected_surviving

    def test_empty_board(self, make_scenario, backend):
        scenario = make_scenario(backend, honest=0, duplicate=0, invalid=0, coerced=0)
        result = scenario.election.tally()

        assert result.valid_count == 0
        assert result.counters.pet_count == 0
        assert result.counters.hash_eval_count == 0


class TestOperationCounts:
    """Tests for the canonical operation counts."""

    def test_quadratic_pet_count(self, make_scenario):
        scenario = make_scenario("quadratic", bad_proof=1)
        result = scenario.election.tally()
        n1, n2, roll = _sizes(result, scenario.roll_size)

        assert (n1, n2, roll) == (8, 7, 5)
        assert result.counters.pet_count == n1 * (n1 - 1) // 2 + n2 * roll
        assert result.counters.hash_eval_count == 0

    @pytest.mark.parametrize("backend", ["linear", "smith_weber"])
    def test_linear_hash_count(self, make_scenario, backend):
        scenario = make_scenario(backend, bad_proof=1)
        result = scenario.election.tally()
        n1, n2, roll = _sizes(result, scenario.roll_size)

        assert result.counters.hash_eval_count == n1 + n2 + roll
        assert result.counters.pet_count == 0

    def test_honest_only_is_three_n(self, make_scenario, backend):
        """Test an all-honest board needs 3n hashes or n(n-1)/2 + n^2 PETs."""
        scenario = make_scenario(backend, honest=6, duplicate=0, invalid=0, coerced=0)
        counters = scenario.election.tally().counters
        n = 6

        if backend == "quadratic":
            assert counters.pet_count == n * (n - 1) // 2 + n * n
        else:
            assert counters.hash_eval_count == 3 * n

    def test_optimized_mode_does_less_work(self, make_scenario):
        canonical = make_scenario("quadratic", election_id=b"optimized-run")
        optimized = make_scenario(
            "quadratic", election_id=b"optimized-run", canonical_counts=False
        )

        full = canonical.election.tally()
        fast = optimized.election.tally()

        assert fast.counts == full.counts == canonical.expected
        assert fast.counters.pet_count < full.counters.pet_count

    def test_other_counters(self, tallied, backend):
        """Test the FHE path does no group exponentiations."""
        counters = tallied.election.result.counters
        assert counters.mix_count == 2
        assert counters.decrypt_count >= sum(tallied.expected.values())
        if backend == "linear":
            assert counters.exponentiation_count == 0
        else:
            assert counters.exponentiation_count > 0


class TestRunner:
    def test_backend_mismatch(self, make_scenario):
        scenario = make_scenario("linear")
        election = scenario.election
        with pytest.raises(TallyAbortedError):
            tally_quadratic(election.board, election.fhe_panel)

    def test_not_set_up(self, make_config):
        from apps.election.protocol import Election

        with pytest.raises(ElectionError):
            run_tally(Election(make_config()))

    def test_result_report(self, tallied):
        data = TallyResultSerializer(tallied.election.result).data

        assert data["counts"] == tallied.expected
        assert data["surviving"] == list(tallied.expected_surviving)
        assert data["counters"]["mix_count"] == 2


class TestWeedingHelpers:
    """Tests for the shared weeding helpers."""

    def test_resolve_duplicates(self):
        keys = ["a", "b", "a", "c", "b"]
        assert resolve_duplicates(keys, DuplicatePolicy.KEEP_LAST) == [2, 3, 4]
        assert resolve_duplicates(keys, DuplicatePolicy.KEEP_FIRST) == [0, 1, 3]

    def test_match_roll_consumes_entries(self):
        """Test one roll entry validates at most one ballot."""
        assert match_roll(["x", "y", "x", "z"], ["x", "z"]) == [0, 3]
        assert match_roll(["x", "x"], ["x", "x"]) == [0, 1]
        assert match_roll([], ["x"]) == []

    def test_disjoint_set_roots_at_smallest(self):
        classes = DisjointSet(5)
        classes.union(3, 1)
        classes.union(4, 3)

        assert [classes.find(i) for i in range(5)] == [0, 1, 2, 1, 1]


def _agrees_with_ground_truth(make_scenario, backend, seed):
    scenario = make_scenario(backend, honest=3, bad_proof=1, seed=b"sweep-%d" % seed)
    result = scenario.election.tally()
    return result.counts == scenario.expected and result.surviving == scenario.expected_surviving


class TestSeedSweep:
    """Tests that varying the seed never changes the outcome."""

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_seeds_agree(self, make_scenario, backend, seed):
        assert _agrees_with_ground_truth(make_scenario, backend, seed)

    @pytest.mark.slow
    def test_hundred_seeds_agree(self, make_scenario, backend):
        failing = [
            seed for seed in range(100)
            if not _agrees_with_ground_truth(make_scenario, backend, seed)
        ]
        assert failing == []


SWEEP_SIZES = (5, 10, 20, 40, 60)


class TestMixedScenarioSweep:
    """Tests agreement on larger boards with a fifth re-votes and a fifth invalid credentials."""

    def test_mixed_board_agrees(self, make_scenario, backend):
        honest = 10
        scenario = make_scenario(
            backend, honest=honest, duplicate=honest // 5, invalid=honest // 5, coerced=2
        )
        result = scenario.election.tally()

        assert result.counts == scenario.expected
        assert result.surviving == scenario.expected_surviving

    @pytest.mark.slow
    def test_hundred_mixed_boards_agree(self, make_scenario, backend):
        failing = []
        for seed in range(100):
            honest = SWEEP_SIZES[seed % len(SWEEP_SIZES)]
            scenario = make_scenario(
                backend,
                honest=honest,
                duplicate=honest // 5,
                invalid=honest // 5,
                coerced=1 + seed % 2,
                seed=b"mixed-%d" % seed,
            )
            result = scenario.election.tally()
            if (result.counts, result.surviving) != (
                scenario.expected,
                scenario.expected_surviving,
            ):
                failing.append(seed)

        assert failing == []
