default_app_config = "apps.mixnet.apps.MixnetConfig"
