import logging
import os
from logging.config import dictConfig

import yaml

from config import LOG_LEVEL

_configured = False


def get_logger(name):
    """
    Creates and returns a logger with the given name.

    The first call loads logs/logging_config.yaml; later calls reuse it.

    Args:
        name: Name for the logger, usually __name__

    Returns:
        A configured logger
    """
    global _configured
    if not _configured:
        _configure()
        _configured = True
    return logging.getLogger(name)


def _configure():
    # Ensure logs directory exists
    logs_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'logs')
    os.makedirs(logs_dir, exist_ok=True)

    config_path = os.path.join(logs_dir, 'logging_config.yaml')
    try:
        with open(config_path, 'r') as f:
            config = yaml.safe_load(f)
        # Update log file path to absolute path
        config['handlers']['file']['filename'] = os.path.join(logs_dir, 'szego.log')
        config['root']['level'] = LOG_LEVEL
        dictConfig(config)
    except (OSError, KeyError, TypeError, ValueError, yaml.YAMLError) as e:
        # Use default configuration if config file is missing or broken
        logging.basicConfig(level=LOG_LEVEL)
        logging.getLogger(__name__).warning(f"Falling back to basic logging: {e}")
