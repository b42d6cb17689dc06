"""
Dispatch an election's tally to its configured backend.
"""
from apps.core.exceptions import ConfigurationError, ElectionError
from apps.election.models import Backend

from .linear import tally_linear
from .models import TallyResult
from .quadratic import tally_quadratic
from .smith_weber import tally_smith_weber


def run_tally(election, **options) -> TallyResult:
    """
    Tally an election run with its own authorities. ``options`` reach the
    backend (``canonical``, ``mix_servers``, ``rng``, ``shadow_rounds``).
    """
    if election.talliers is None and election.oracle is None:
        raise ElectionError("Election has not been set up")
    options.setdefault("mix_servers", election.mix_servers)
    options.setdefault("rng", election.rng.child("tally"))

    backend = election.config.backend
    if backend == Backend.QUADRATIC:
        return tally_quadratic(election.board, election.talliers, **options)
    if backend == Backend.SMITH_WEBER:
        return tally_smith_weber(election.board, election.talliers, **options)
    if backend == Backend.LINEAR:
        return tally_linear(election.board, election.fhe_panel, election.oracle, **options)
    raise ConfigurationError("Unknown tallying backend", backend=backend)
