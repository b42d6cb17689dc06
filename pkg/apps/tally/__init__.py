default_app_config = "apps.tally.apps.TallyConfig"
