"""
Configuration management for the harmonic normality toolkit.
"""

import os
from typing import Dict, List
from dotenv import load_dotenv


class Config:
    """Configuration class for the harmonic normality toolkit."""

    def __init__(self):
        """Initialize configuration from environment variables."""
        # Load environment variables from .env file
        load_dotenv()

        # Numerical tolerances
        self.singularity_tol = float(os.getenv('HN_SINGULARITY_TOL', '1e-9'))
        self.overflow_guard = float(os.getenv('HN_OVERFLOW_GUARD', '1e300'))
        self.dilatation_tol = float(os.getenv('HN_DILATATION_TOL', '1e-12'))
        self.residual_tol = float(os.getenv('HN_RESIDUAL_TOL', '1e-10'))
        self.boundary_clearance = float(
            os.getenv('HN_BOUNDARY_CLEARANCE', '1e-7'))
        self.multiplicity_tol = float(
            os.getenv('HN_MULTIPLICITY_TOL', '1e-6'))

        # Schedule r_n = 1 - rstart * rfactor^(n-1), n = 1..steps
        self.default_rstart = float(os.getenv('HN_DEFAULT_RSTART', '0.5'))
        self.default_rfactor = float(os.getenv('HN_DEFAULT_RFACTOR', '0.5'))
        self.default_steps = int(os.getenv('HN_DEFAULT_STEPS', '12'))
        self.default_depth = int(os.getenv('HN_DEFAULT_DEPTH', '8'))

        # Probes and sampling
        self.probe_samples = int(os.getenv('HN_PROBE_SAMPLES', '4096'))
        self.sampling_seed = int(os.getenv('HN_SAMPLING_SEED', '0'))
        self.max_workers = int(os.getenv('HN_MAX_WORKERS', '1'))

        # Output
        self.default_output = os.getenv('HN_DEFAULT_OUTPUT', 'report.json')
        self.default_targets = self._parse_list(
            os.getenv('HN_DEFAULT_TARGETS', ''))

        # Logging Configuration
        self.log_file = self._generate_timestamped_log_path()
        self.log_level = os.getenv('LOG_LEVEL', 'INFO')
        self.console_logging = self._parse_bool(
            os.getenv('LOG_CONSOLE', 'true'))

    def _generate_timestamped_log_path(self) -> str:
        """Generate timestamped log file path."""
        from datetime import datetime

        base_log_file = os.getenv('LOG_FILE', 'logs/harmonic_normality.log')
        log_dir = os.path.dirname(base_log_file) or '.'

        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')

        # JSON-lines records, one structured event per line
        log_filename = f"harmonic_normality_{timestamp}.jsonl"

        return os.path.join(log_dir, log_filename)

    def _parse_list(self, value: str) -> List[str]:
        """Parse comma-separated string to list."""
        if not value:
            return []
        return [item.strip() for item in value.split(',') if item.strip()]

    def _parse_bool(self, value: str) -> bool:
        """Parse string to boolean."""
        return value.lower() in ('true', '1', 'yes', 'on')

    def validate(self) -> List[str]:
        """Validate configuration and return list of errors."""
        errors = []

        for name in ('singularity_tol', 'overflow_guard', 'dilatation_tol',
                     'residual_tol', 'boundary_clearance', 'multiplicity_tol'):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be positive")

        if not 0 < self.default_rstart < 1:
            errors.append("HN_DEFAULT_RSTART must lie in (0, 1)")
        if not 0 < self.default_rfactor < 1:
            errors.append("HN_DEFAULT_RFACTOR must lie in (0, 1)")
        if self.default_steps < 1:
            errors.append("HN_DEFAULT_STEPS must be at least 1")
        if self.default_depth < 0:
            errors.append("HN_DEFAULT_DEPTH must be non-negative")
        if self.probe_samples < 1:
            errors.append("HN_PROBE_SAMPLES must be at least 1")
        if self.max_workers < 1:
            errors.append("HN_MAX_WORKERS must be at least 1")

        return errors

    def get_tolerances(self) -> Dict[str, float]:
        """Get numerical tolerances as dictionary."""
        return {
            'singularity_tol': self.singularity_tol,
            'overflow_guard': self.overflow_guard,
            'dilatation_tol': self.dilatation_tol,
            'residual_tol': self.residual_tol,
            'boundary_clearance': self.boundary_clearance,
            'multiplicity_tol': self.multiplicity_tol,
        }

    def get_schedule_defaults(self) -> Dict[str, float]:
        """Get default radius schedule parameters as dictionary."""
        return {
            'r_start': self.default_rstart,
            'r_factor': self.default_rfactor,
            'steps': self.default_steps,
            'depth': self.default_depth,
        }

    def __str__(self) -> str:
        """String representation of configuration."""
        return f"""Harmonic Normality Toolkit Configuration:
  Schedule: r_n = 1 - {self.default_rstart} * {self.default_rfactor}^(n-1), n = 1..{self.default_steps}
  Depth: {self.default_depth}
  Residual Tol: {self.residual_tol}
  Dilatation Tol: {self.dilatation_tol}
  Boundary Clearance: {self.boundary_clearance}
  Probe Samples: {self.probe_samples}
  Log File: {self.log_file}
"""
