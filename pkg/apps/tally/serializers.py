"""
Serializers for tally and audit report files.
"""
from rest_framework import serializers

from .models import Stage


class OpCountersSerializer(serializers.Serializer):
    pet_count = serializers.IntegerField(min_value=0)
    hash_eval_count = serializers.IntegerField(min_value=0)
    mix_count = serializers.IntegerField(min_value=0)
    decrypt_count = serializers.IntegerField(min_value=0)
    exponentiation_count = serializers.IntegerField(min_value=0)


class WeedingReportSerializer(serializers.Serializer):
    stages = serializers.DictField(child=serializers.ListField(child=serializers.IntegerField()))
    evidence = serializers.DictField(child=serializers.ListField(child=serializers.IntegerField()))
    flagged = serializers.ListField(child=serializers.IntegerField())

    def validate_stages(self, value):
        unknown = sorted(set(value) - set(Stage.values))
        if unknown:
            raise serializers.ValidationError(f"Unknown stages: {', '.join(unknown)}")
        return value


class TallyResultSerializer(serializers.Serializer):
    """
    Report form of a tally. ``surviving`` is only filled for runs whose
    secrets are at hand and is omitted when empty.
    """

    backend = serializers.CharField()
    counts = serializers.DictField(child=serializers.IntegerField(min_value=0))
    valid_count = serializers.IntegerField(read_only=True)
    proof_rejected = serializers.IntegerField(min_value=0)
    duplicates_removed = serializers.IntegerField(min_value=0)
    invalid_removed = serializers.IntegerField(min_value=0)
    stuffing_flagged = serializers.IntegerField(min_value=0)
    spoiled = serializers.IntegerField(min_value=0)
    board_length = serializers.IntegerField(min_value=0)
    counters = OpCountersSerializer()
    weeding = WeedingReportSerializer()
    surviving = serializers.ListField(child=serializers.IntegerField(), required=False)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if not data.get("surviving"):
            data.pop("surviving", None)
        return data


class AuditFailureSerializer(serializers.Serializer):
    check = serializers.CharField()
    message = serializers.CharField()
    index = serializers.IntegerField(allow_null=True)


class AuditReportSerializer(serializers.Serializer):
    backend = serializers.CharField()
    ok = serializers.BooleanField()
    passed = serializers.ListField(child=serializers.CharField())
    failures = AuditFailureSerializer(many=True)
    recomputed = serializers.DictField()
