default_app_config = "apps.crypto.apps.CryptoConfig"
