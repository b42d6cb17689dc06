"""
Serializers for board entries read back from JSON Lines.
"""
import base64
import binascii

from rest_framework import serializers

from .models import BoardEntry, EntryKind

HEX_DIGEST = r"^[0-9a-f]{64}$"


class BoardEntrySerializer(serializers.Serializer):
    """Validates one persisted board line."""

    index = serializers.IntegerField(min_value=0)
    kind = serializers.ChoiceField(choices=EntryKind.choices)
    payload = serializers.CharField(allow_blank=True, trim_whitespace=False)
    prev_hash = serializers.RegexField(HEX_DIGEST)
    entry_hash = serializers.RegexField(HEX_DIGEST)
    author = serializers.CharField(max_length=64)
    signature = serializers.RegexField(r"^(?:[0-9a-f]{128})?$", allow_blank=True, required=False)

    def validate_payload(self, value):
        try:
            base64.b64decode(value, validate=True)
        except (binascii.Error, ValueError):
            raise serializers.ValidationError("Payload must be base64")
        return value

    def to_entry(self) -> BoardEntry:
        return BoardEntry.from_record(self.validated_data)
