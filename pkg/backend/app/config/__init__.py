from .settings import Settings, settings, load_settings, describe
from .logging_config import (
    setup_logging,
    get_logger,
    set_log_level,
)

__all__ = [
    'Settings',
    'settings',
    'load_settings',
    'describe',
    'setup_logging',
    'get_logger',
    'set_log_level',
]
