"""
Pytest configuration and fixtures.
"""
import pytest


@pytest.fixture
def tiny_group(settings):
    """The p = 23 group used for hand-checkable examples."""
    from apps.crypto.group import validate_params

    group = settings.TINY_GROUP
    return validate_params(group["p"], group["q"], group["g1"], group["g2"])


@pytest.fixture(scope="session")
def group64():
    """A 64-bit safe-prime group."""
    from apps.crypto.group import generate_params

    return generate_params(64, b"test-group")


@pytest.fixture
def rng():
    from apps.core.drbg import Drbg

    return Drbg(b"test-rng")


@pytest.fixture
def keypair(group64, rng):
    from apps.crypto.elgamal import keygen

    return keygen(group64, rng.child("key"))


@pytest.fixture
def panel(keypair, rng):
    """Two-of-three tallier panel over the 64-bit group."""
    from apps.crypto.threshold import TallierPanel

    return TallierPanel.from_keypair(keypair, 2, 3, rng.child("panel"))


@pytest.fixture
def ctx():
    from apps.crypto.nizk import ProofContext

    return ProofContext(election_id=b"test-election")


@pytest.fixture
def oracle():
    """Fresh FHE oracle; request `approvals` to generate its key."""
    from apps.fhe.oracle import FheOracle

    return FheOracle(b"test-oracle")


@pytest.fixture
def approvals(oracle):
    """The approval panel holding the oracle's key shares."""
    from apps.fhe.oracle import ApprovalPanel

    public_key, shares = oracle.fhe_keygen(2, 3)
    return ApprovalPanel(public_key, shares)


@pytest.fixture
def make_config():
    """Build an ElectionConfig with per-test overrides."""
    from .factories import ElectionConfigFactory

    return ElectionConfigFactory


@pytest.fixture
def make_election(make_config):
    """Set up an election for a backend."""
    from apps.election.protocol import Election

    def build(backend="quadratic", path=None, **overrides):
        return Election(make_config(backend=backend, **overrides), path).setup()

    return build


@pytest.fixture
def make_scenario(make_config):
    """Generate a populated election for a backend."""
    from apps.election.scenario import generate_scenario

    def build(
        backend="quadratic",
        honest=4,
        duplicate=1,
        invalid=1,
        coerced=1,
        bad_proof=0,
        stuffed=0,
        path=None,
        **overrides,
    ):
        config = make_config(backend=backend, **overrides)
        return generate_scenario(
            honest,
            duplicate,
            invalid,
            coerced,
            config,
            n_bad_proof=bad_proof,
            n_stuffed=stuffed,
            path=path,
        )

    return build


@pytest.fixture(params=["quadratic", "smith_weber", "linear"])
def backend(request):
    return request.param


@pytest.fixture
def tallied(make_scenario, backend):
    """A finished election for each backend, with its ground truth."""
    scenario = make_scenario(backend, bad_proof=1)
    scenario.election.tally()
    return scenario


@pytest.fixture
def rechain():
    """Re-sign a list of (kind, payload, author) rows into a fresh, valid hash chain."""
    from apps.board.board import BulletinBoard

    def rebuild(election, rows):
        board = BulletinBoard(election.registry)
        for kind, payload, author in rows:
            board.append(kind, payload, author)
        return board.transcript()

    return rebuild


@pytest.fixture
def reseal(rechain):
    """
    Rebuild a transcript with one entry's payload replaced, re-signing every
    entry so the chain itself still verifies.
    """
    from apps.core.encoding import canonical_json

    def rebuild(election, index, transform):
        rows = []
        for entry in election.board.entries:
            payload = entry.payload
            if entry.index == index:
                payload = canonical_json(transform(entry.data))
            rows.append((entry.kind, payload, entry.author))
        return rechain(election, rows)

    return rebuild
