"""
Serializers for election config files.
"""
from django.conf import settings

from rest_framework import serializers

from apps.core.exceptions import ConfigurationError
from apps.crypto.group import MIN_BIT_LENGTH

from .models import Backend, DuplicatePolicy, ElectionConfig


class ScenarioSerializer(serializers.Serializer):
    """Ballot mix to generate for a run."""

    honest = serializers.IntegerField(min_value=0, default=10)
    duplicate = serializers.IntegerField(min_value=0, default=0)
    invalid = serializers.IntegerField(min_value=0, default=0)
    coerced = serializers.IntegerField(min_value=0, default=0)
    bad_proof = serializers.IntegerField(min_value=0, default=0)
    stuffed = serializers.IntegerField(min_value=0, default=0)

    def validate(self, attrs):
        if attrs["duplicate"] > attrs["honest"]:
            raise serializers.ValidationError(
                {"duplicate": "Duplicate ballots re-use honest voters' credentials"}
            )
        return attrs


class ElectionConfigSerializer(serializers.Serializer):
    """
    Validates an election config file. Missing fields fall back to the
    ``ELECTION_DEFAULTS`` setting.
    """

    election_id = serializers.CharField(max_length=128)
    seed = serializers.CharField(max_length=128, default="0")
    candidates = serializers.ListField(
        child=serializers.CharField(max_length=64), min_length=1, required=False
    )
    backend = serializers.ChoiceField(choices=Backend.choices, required=False)
    duplicate_policy = serializers.ChoiceField(choices=DuplicatePolicy.choices, required=False)
    threshold = serializers.IntegerField(min_value=1, required=False)
    talliers = serializers.IntegerField(min_value=1, required=False)
    registrars = serializers.IntegerField(min_value=1, required=False)
    mix_servers = serializers.IntegerField(min_value=1, required=False)
    shadow_rounds = serializers.IntegerField(min_value=1, max_value=256, required=False)
    group_bits = serializers.IntegerField(min_value=MIN_BIT_LENGTH, required=False)
    eligibility = serializers.BooleanField(required=False)
    canonical_counts = serializers.BooleanField(required=False)
    scenario = ScenarioSerializer(required=False)

    def to_internal_value(self, data):
        if isinstance(data, dict) and isinstance(data.get("seed"), int):
            data = {**data, "seed": str(data["seed"])}
        return super().to_internal_value(data)

    def validate_candidates(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("Candidates must be distinct")
        return value

    def validate(self, attrs):
        merged = {**settings.ELECTION_DEFAULTS, **attrs}
        if merged["threshold"] > merged["talliers"]:
            raise serializers.ValidationError(
                {"threshold": "Threshold cannot exceed the tallier count"}
            )
        if merged["eligibility"] and merged["backend"] != Backend.LINEAR:
            raise serializers.ValidationError(
                {"eligibility": "Eligibility mode needs the linear backend"}
            )
        scenario = attrs.get("scenario") or {}
        if scenario.get("stuffed") and not merged["eligibility"]:
            raise serializers.ValidationError(
                {"scenario": "Stuffed ballots are only generated in eligibility mode"}
            )
        return attrs

    def to_config(self) -> ElectionConfig:
        data = dict(self.validated_data)
        data.pop("scenario", None)
        return ElectionConfig.from_settings(**data)

    def scenario_plan(self) -> dict:
        if "scenario" in self.validated_data:
            return dict(self.validated_data["scenario"])
        defaults = ScenarioSerializer(data={})
        defaults.is_valid(raise_exception=True)
        return dict(defaults.validated_data)


def load_config(data) -> tuple[ElectionConfig, dict]:
    """Validate raw config data; raise ConfigurationError with field errors."""
    serializer = ElectionConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigurationError(errors=serializer.errors)
    return serializer.to_config(), serializer.scenario_plan()
