"""
Shared plumbing for the management commands.
"""
import argparse
import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import ConfigurationError, PersistenceError, handle_command_error
from apps.core.tracing import new_run_id
from apps.election.serializers import load_config

logger = logging.getLogger(__name__)


class ElectionCommand(BaseCommand):
    """
    Base for every command: subclasses implement ``run`` and any
    ``ElectionError`` becomes a ``CommandError`` with its exit code.
    """

    def handle(self, *args, **options):
        run_id = new_run_id()
        try:
            return self.run(run_id=run_id, **options)
        except CommandError:
            raise
        except Exception as exc:
            raise handle_command_error(exc, run_id) from exc

    def run(self, run_id: str, **options):
        raise NotImplementedError

    def emit(self, data) -> None:
        self.stdout.write(json.dumps(data, indent=2, sort_keys=True))


def add_config_arguments(parser, *, required: bool = True) -> None:
    parser.add_argument("--config", required=required, help="Election config file (JSON)")
    parser.add_argument("--seed", help="Override the config seed")
    parser.add_argument("--backend", help="Override the tallying backend")
    parser.add_argument(
        "--canonical-counts",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Run every PET without early exit (default on)",
    )


def read_json(path: str | Path):
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError("Config file not found", path=str(path))
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError("Config file is not JSON", path=str(path)) from exc


def read_config(path, *, seed=None, backend=None, canonical=None, election_id=None):
    """Config file plus command-line overrides, validated together."""
    data = read_json(path) if path else {}
    if not isinstance(data, dict):
        raise ConfigurationError("Config file must hold a JSON object", path=str(path))
    overrides = {
        "seed": seed,
        "backend": backend,
        "canonical_counts": canonical,
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    if election_id and "election_id" not in data:
        data["election_id"] = election_id
    return load_config(data)


def parse_sizes(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError("Sizes must be a comma-separated list of integers") from exc


def write_json(path: str | Path, data) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise PersistenceError(path=str(path), reason=str(exc)) from exc
    logger.info(f"Wrote {path}", extra={"path": str(path)})
    return path


def sibling(path: str | Path, suffix: str) -> Path:
    """``board.jsonl`` -> ``board.<suffix>``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.{suffix}")
