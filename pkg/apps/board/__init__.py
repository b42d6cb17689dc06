default_app_config = "apps.board.apps.BoardConfig"
