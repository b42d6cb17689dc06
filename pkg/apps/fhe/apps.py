from django.apps import AppConfig


class FheConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.fhe"
    verbose_name = "FHE Oracle"
