default_app_config = "apps.fhe.apps.FheConfig"
