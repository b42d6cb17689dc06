"""
Development settings: readable logs, one line per phase and tally step.
"""
DEBUG = True

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "filters": {
        "run_context": {"()": "apps.core.tracing.RunContextFilter"},
    },
    "formatters": {
        "phase": {
            "format": "{asctime} {levelname:<7} [{run_id}] {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "phase",
            "filters": ["run_context"],
        },
    },
    "root": {"handlers": ["console"], "level": "WARNING"},
    "loggers": {
        "django": {"handlers": ["console"], "level": "WARNING", "propagate": False},
        "apps": {"handlers": ["console"], "level": "DEBUG", "propagate": False},
        # one debug line per board entry and mix server drowns the phase timings
        "apps.board": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "apps.mixnet": {"handlers": ["console"], "level": "INFO", "propagate": False},
    },
}
