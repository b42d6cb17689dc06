"""
Error hierarchy and command-line error handling.
"""
import json
import logging
import uuid

from django.core.management.base import CommandError

logger = logging.getLogger(__name__)


class ElectionError(Exception):
    """
    Base class for every failure raised by the workbench.

    Subclasses pick a machine-readable code, a default message and the exit
    code a management command reports when the error reaches the top level.
    """

    default_detail = "Election processing failed"
    default_code = "election_error"
    exit_code = 1

    def __init__(self, detail: str | None = None, **details):
        self.detail = detail or self.default_detail
        self.details = details
        super().__init__(self.detail)


def handle_command_error(exc: Exception, run_id: str | None = None) -> CommandError:
    """
    Turn an exception into a CommandError carrying a consistent error body.
    """
    run_id = run_id or str(uuid.uuid4())[:8]

    if isinstance(exc, ElectionError):
        error_data = {
            "error": {
                "code": get_error_code(exc),
                "message": exc.detail,
                "details": {key: str(value) for key, value in exc.details.items()},
            },
            "meta": {"run_id": run_id},
        }
        logger.warning(
            "Command Error [%s]: %s - %s",
            run_id,
            error_data["error"]["code"],
            error_data["error"]["message"],
            extra={"run_id": run_id, "error_code": error_data["error"]["code"]},
        )
        return CommandError(json.dumps(error_data, sort_keys=True), returncode=exc.exit_code)

    logger.exception(f"Unhandled Exception [{run_id}]: {exc}")
    error_data = {
        "error": {
            "code": "internal_error",
            "message": "An unexpected error occurred",
            "details": {"exception": exc.__class__.__name__},
        },
        "meta": {"run_id": run_id},
    }
    return CommandError(json.dumps(error_data, sort_keys=True), returncode=1)


def get_error_code(exc) -> str:
    """Get a machine-readable error code from an exception."""
    if hasattr(exc, "default_code"):
        return exc.default_code
    return exc.__class__.__name__.lower()


# Group and encryption errors
class InvalidGroupError(ElectionError):
    default_detail = "Group parameters are not valid"
    default_code = "invalid_group"
    exit_code = 2


class ParameterSearchError(ElectionError):
    default_detail = "No safe prime found within the attempt bound"
    default_code = "parameter_search_failed"


class EncodingError(ElectionError):
    default_detail = "Value is not an element of the prime-order subgroup"
    default_code = "encoding_error"


class DegenerateKeyError(ElectionError):
    default_detail = "Key pair has an identity public key"
    default_code = "degenerate_key"


class InvalidShareError(ElectionError):
    default_detail = "Key share does not match its public commitment"
    default_code = "invalid_share"


class ProofError(ElectionError):
    default_detail = "Proof precondition violated"
    default_code = "proof_error"


# Bulletin board errors
class UnauthorizedAuthorError(ElectionError):
    default_detail = "Author may not post entries of this kind"
    default_code = "unauthorized_author"


class PersistenceError(ElectionError):
    default_detail = "Board entry could not be persisted"
    default_code = "persistence_failed"


class TranscriptNotFoundError(ElectionError):
    default_detail = "Transcript file not found"
    default_code = "transcript_not_found"
    exit_code = 2


# FHE oracle errors
class OracleRefusalError(ElectionError):
    default_detail = "Oracle refused the operation"
    default_code = "oracle_refusal"


class InsufficientApprovalsError(OracleRefusalError):
    default_detail = "Not enough tallier approvals for decryption"
    default_code = "insufficient_approvals"


class TagMismatchError(ElectionError):
    default_detail = "Ciphertext plaintext-space tag does not match the operation"
    default_code = "tag_mismatch"


class UnknownHashKeyError(ElectionError):
    default_detail = "Hash key is not registered with the oracle"
    default_code = "unknown_hash_key"


# Protocol errors
class MixError(ElectionError):
    default_detail = "Mix input lists are malformed"
    default_code = "mix_error"


class ChoiceNotInSlateError(ElectionError):
    default_detail = "Choice is not on the candidate slate"
    default_code = "choice_not_in_slate"


class ConfigurationError(ElectionError):
    default_detail = "Election configuration is invalid"
    default_code = "configuration_error"
    exit_code = 2


class TallyAbortedError(ElectionError):
    default_detail = "Tallying aborted on failed evidence"
    default_code = "tally_aborted"


class EvidenceRejectedError(ElectionError):
    default_detail = "Published evidence does not verify"
    default_code = "evidence_rejected"
