"""
Base Django settings for the coercion-resistant tallying workbench.
"""
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent.parent

SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "django-insecure-local-workbench")

# Application definition
INSTALLED_APPS = [
    # Third party
    "rest_framework",
    # Local apps
    "apps.core",
    "apps.crypto",
    "apps.board",
    "apps.fhe",
    "apps.mixnet",
    "apps.election",
    "apps.tally",
    "apps.bench",
]

# Elections live on the bulletin board (JSON Lines), not in a database.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value else default


def _env_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.lower() in ("1", "true", "yes", "on")


# Defaults for every ElectionConfig field a config file leaves out
ELECTION_DEFAULTS = {
    "candidates": ["alice", "bob", "carol"],
    "group_bits": _env_int("ELECTION_GROUP_BITS", 64),
    "talliers": _env_int("ELECTION_TALLIERS", 3),
    "threshold": _env_int("ELECTION_THRESHOLD", 2),
    "registrars": _env_int("ELECTION_REGISTRARS", 2),
    "mix_servers": _env_int("ELECTION_MIX_SERVERS", 2),
    "shadow_rounds": _env_int("ELECTION_SHADOW_ROUNDS", 16),
    "backend": os.getenv("ELECTION_BACKEND", "quadratic"),
    "duplicate_policy": os.getenv("ELECTION_DUPLICATE_POLICY", "keep_last"),
    "eligibility": _env_bool("ELECTION_ELIGIBILITY", False),
    "canonical_counts": _env_bool("ELECTION_CANONICAL_COUNTS", True),
}

# Complexity sweep defaults; counts do not depend on the group size
BENCH_DEFAULTS = {
    "sizes": [50, 100, 200, 400],
    "backends": ["quadratic", "linear", "smith_weber"],
    "repetitions": 1,
    "group_bits": _env_int("BENCH_GROUP_BITS", 64),
    "talliers": 1,
    "threshold": 1,
    "mix_servers": 1,
    "shadow_rounds": 16,
}

# Group used by the reference hand examples and tiny exhaustive tests
TINY_GROUP = {"p": 23, "q": 11, "g1": 4, "g2": 9}

# Keyed-hash digest length for the FHE oracle, in bytes
FHE_DIGEST_BYTES = 16

# LOGGING lives in the development and production overlays
