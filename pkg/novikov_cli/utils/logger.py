import logging
import logging.config
import os
from pathlib import Path

from novikov_cli.utils.variables import (
    LOG_FILE_NAME,
    TOOL_CONFIGURATION_FOLDER,
    ENV_LOG_PATH,
    ENV_LOG_LEVEL,
    ENV_CLI_DEBUG
)


def _get_logs_path() -> Path | None:
    """
    Returns an existing logs folder or None if neither the configured nor
    the default one can be created
    """
    default = str(Path.home() / TOOL_CONFIGURATION_FOLDER / 'logs')
    path = os.getenv(ENV_LOG_PATH, default)
    try:
        os.makedirs(path, exist_ok=True)
    except OSError:
        logging.getLogger().warning(
            f'Cannot access {path}. Writing logs to {default}'
        )
        path = default
        try:
            os.makedirs(path, exist_ok=True)
        except OSError:
            return None
    return Path(path).resolve()


LOGS_PATH = _get_logs_path()
LOGS_FILE = LOGS_PATH / LOG_FILE_NAME if LOGS_PATH else None

_handlers = {
    'console_handler': {
        'class': 'logging.StreamHandler',
        'formatter': 'main_formatter'
    },
}
_active = ['console_handler'] if os.getenv(ENV_CLI_DEBUG) else []
if LOGS_FILE:
    _handlers['file_handler'] = {
        'class': 'logging.FileHandler',
        'filename': LOGS_FILE,
        'formatter': 'main_formatter',
        'delay': True,
    }
    _active.append('file_handler')

logging.config.dictConfig({
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'main_formatter': {
            'format': '[%(asctime)s] %(levelname)s [%(name)s.%(funcName)s:%(lineno)d] %(message)s'
        },
    },
    'handlers': _handlers,
    'loggers': {
        'novikov_cli': {
            'level': os.getenv(ENV_LOG_LEVEL, 'INFO'),
            'handlers': _active,
            'propagate': False,
        },
    }
})


def get_logger(name: str, level=None) -> logging.Logger:
    log = logging.getLogger(name)
    if level:
        log.setLevel(level)
    return log
