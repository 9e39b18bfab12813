"""
Utility modules for the contact-complexity pipeline.
"""

from .config import get_config, set_config
from .log import setup_logging

__all__ = ["get_config", "set_config", "setup_logging"]
