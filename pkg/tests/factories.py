"""
Factories for election configs and ballot bookkeeping.
"""
import factory

from apps.election.models import Backend, CastRecord, DuplicatePolicy, ElectionConfig


class ElectionConfigFactory(factory.Factory):
    """Small, fast elections: 64-bit group, two-of-three talliers, two mix servers."""

    class Meta:
        model = ElectionConfig

    election_id = factory.Sequence(lambda n: f"test-election-{n}".encode())
    candidates = ("alice", "bob", "carol")
    threshold = 2
    talliers = 3
    registrars = 2
    backend = Backend.QUADRATIC
    duplicate_policy = DuplicatePolicy.KEEP_LAST
    seed = b"test-seed"
    eligibility = False
    group_bits = 64
    mix_servers = 2
    shadow_rounds = 8
    canonical_counts = True


class CastRecordFactory(factory.Factory):
    class Meta:
        model = CastRecord

    board_index = factory.Sequence(lambda n: n)
    credential_key = factory.Sequence(lambda n: f"credential-{n}")
    choice = "alice"
    proof_valid = True
    registered = True
    eligible = True
    label = "honest"
