default_app_config = "apps.election.apps.ElectionConfig"
