"""
Tally results, weeding reports and operation counters.
"""
from dataclasses import asdict, dataclass, field

from django.db import models


class Stage(models.TextChoices):
    """Weeding stages, in the order ballots pass through them."""

    POSTED = "posted", "Posted"
    PROOF_VALID = "proof_valid", "Proofs verified"
    ELIGIBLE = "eligible", "Preimage checked"
    DEDUPLICATED = "deduplicated", "Duplicates removed"
    REGISTERED = "registered", "Matched against the roll"
    COUNTED = "counted", "Decrypted and counted"


@dataclass
class OpCounters:
    pet_count: int = 0
    hash_eval_count: int = 0
    mix_count: int = 0
    decrypt_count: int = 0
    exponentiation_count: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "OpCounters":
        return cls(**{key: int(data.get(key, 0)) for key in cls.__dataclass_fields__})


@dataclass
class WeedingReport:
    """
    Survivors per stage and the board entries that justify each stage.

    Stages up to deduplication hold board indices; stages after the mix hold
    mixed row positions.
    """

    stages: dict[str, list[int]] = field(default_factory=dict)
    evidence: dict[str, list[int]] = field(default_factory=dict)
    flagged: list[int] = field(default_factory=list)

    def record(self, stage: str, survivors) -> None:
        self.stages[str(stage)] = list(survivors)

    def cite(self, stage: str, board_index: int) -> None:
        self.evidence.setdefault(str(stage), []).append(board_index)

    def survivors(self, stage: str) -> list[int]:
        return self.stages.get(str(stage), [])

    def to_dict(self) -> dict:
        return {
            "stages": {key: list(value) for key, value in self.stages.items()},
            "evidence": {key: list(value) for key, value in self.evidence.items()},
            "flagged": list(self.flagged),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WeedingReport":
        return cls(
            stages={key: list(value) for key, value in data.get("stages", {}).items()},
            evidence={key: list(value) for key, value in data.get("evidence", {}).items()},
            flagged=list(data.get("flagged", [])),
        )


@dataclass
class TallyResult:
    """
    Per-candidate counts with removal counts and operation counters.

    ``surviving`` maps counted ballots back to board indices through the
    secret mix permutation; it exists only in the tallying process and is
    never posted.
    """

    backend: str
    counts: dict[str, int]
    proof_rejected: int = 0
    duplicates_removed: int = 0
    invalid_removed: int = 0
    spoiled: int = 0
    stuffing_flagged: int = 0
    counters: OpCounters = field(default_factory=OpCounters)
    weeding: WeedingReport = field(default_factory=WeedingReport)
    board_length: int = 0
    surviving: tuple[int, ...] = field(default=(), compare=False)

    @property
    def valid_count(self) -> int:
        return sum(self.counts.values())

    def to_payload(self) -> dict:
        return {
            "backend": str(self.backend),
            "counts": dict(self.counts),
            "proof_rejected": self.proof_rejected,
            "duplicates_removed": self.duplicates_removed,
            "invalid_removed": self.invalid_removed,
            "spoiled": self.spoiled,
            "stuffing_flagged": self.stuffing_flagged,
            "counters": self.counters.to_dict(),
            "weeding": self.weeding.to_dict(),
            "board_length": self.board_length,
        }

    @classmethod
    def from_payload(cls, data: dict) -> "TallyResult":
        return cls(
            backend=data["backend"],
            counts={key: int(value) for key, value in data["counts"].items()},
            proof_rejected=int(data.get("proof_rejected", 0)),
            duplicates_removed=int(data.get("duplicates_removed", 0)),
            invalid_removed=int(data.get("invalid_removed", 0)),
            spoiled=int(data.get("spoiled", 0)),
            stuffing_flagged=int(data.get("stuffing_flagged", 0)),
            counters=OpCounters.from_dict(data.get("counters", {})),
            weeding=WeedingReport.from_dict(data.get("weeding", {})),
            board_length=int(data.get("board_length", 0)),
        )
