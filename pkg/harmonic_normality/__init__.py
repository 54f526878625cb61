"""Harmonic normality toolkit package."""

import logging

from .utils.logger import configure_structlog

# warnings to stderr until a run configures its log file
configure_structlog(None, logging.WARNING)
