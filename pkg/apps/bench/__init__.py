default_app_config = "apps.bench.apps.BenchConfig"
