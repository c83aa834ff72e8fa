# src/utils/logging_config.py
import os
import logging
from typing import Optional

from src.config.settings import LOG_DIR, LOG_LEVEL


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None):
    """Configure root logging for the simulator (file + console)."""
    log_dir = log_dir or LOG_DIR
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    # Drop existing handlers so repeated CLI invocations don't duplicate lines
    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)

    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(os.path.join(log_dir, 'qss6.log'), encoding='utf-8'),
            logging.StreamHandler()
        ]
    )

logger = logging.getLogger(__name__)
