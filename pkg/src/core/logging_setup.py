"""
Logging setup for training runs.

Modules log through the root logger with bracketed component tags
(`logging.info("[SEMIMOL] ...")`); this module only wires handlers.
"""

import logging
import os
from pathlib import Path
from typing import Optional

from config import config

_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
_installed = {}


def setup_logging(run_dir: Optional[str] = None, console_level: Optional[str] = None) -> logging.Logger:
    """
    Attach a console handler and, when run_dir is given, a file handler in the run directory.

    Calling it again for the same run directory is a no-op.
    """
    root = logging.getLogger()
    root.setLevel(logging.DEBUG)

    if 'console' not in _installed:
        console = logging.StreamHandler()
        console.setLevel(console_level or config.LOG_LEVELS['console'])
        console.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(console)
        _installed['console'] = console
    elif console_level:
        _installed['console'].setLevel(console_level)

    if run_dir is not None:
        log_path = str(Path(run_dir) / config.LOG_FILES['main'])
        if _installed.get('file_path') != log_path:
            teardown_file_logging()
            os.makedirs(os.path.dirname(log_path) or '.', exist_ok=True)
            handler = logging.FileHandler(log_path)
            handler.setLevel(config.LOG_LEVELS['file'])
            handler.setFormatter(logging.Formatter(_FORMAT))
            root.addHandler(handler)
            _installed['file'] = handler
            _installed['file_path'] = log_path

    return root


def teardown_file_logging():
    """Detach the run-directory file handler, if any"""
    handler = _installed.pop('file', None)
    _installed.pop('file_path', None)
    if handler is not None:
        logging.getLogger().removeHandler(handler)
        handler.close()
