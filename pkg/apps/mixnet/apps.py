from django.apps import AppConfig


class MixnetConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.mixnet"
    verbose_name = "Mixnet"
