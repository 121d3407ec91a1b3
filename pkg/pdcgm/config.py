import os
import logging
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from pdcgm.colgen.models import DriverConfig, DriverMode
from pdcgm.constants import (
    DEFAULT_EPS_MAX,
    DEFAULT_GAMMA,
    DEFAULT_IPM_MAX_ITER,
    DEFAULT_MAX_OUTER,
)

logger = logging.getLogger(__name__)


class Config:
    """
    Configuration manager for pdcgm

    Loads settings from:
    1. Environment variables (.env file)
    2. Defaults

    Command-line flags override both; see pdcgm.main.
    """

    DEFAULT_LOG_LEVEL = "INFO"

    # Per-application (delta, degree) defaults
    APPLICATION_DEFAULTS = {
        "mcnf": (1e-5, 10.0),
        "tssp": (1e-5, 5.0),
        "quadratic": (1e-6, 10.0),
    }

    def __init__(self, env_file: Optional[Path] = None):
        """
        Initialize configuration

        Args:
            env_file: .env file to load (default: ./.env when it exists)
        """
        if env_file is None:
            env_file = Path.cwd() / ".env"
        if env_file.exists():
            load_dotenv(env_file)
            logger.info(f"Loaded .env from {env_file}")

    def _float(self, name: str, default: float) -> float:
        raw = os.getenv(name)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            logger.warning(f"Ignoring malformed {name}={raw!r}, using {default}")
            return default

    def _int(self, name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            logger.warning(f"Ignoring malformed {name}={raw!r}, using {default}")
            return default

    @property
    def log_level(self) -> str:
        """Get log level"""
        return os.getenv("PDCGM_LOG_LEVEL", self.DEFAULT_LOG_LEVEL)

    @property
    def gamma(self) -> float:
        """Centrality neighbourhood width"""
        return self._float("PDCGM_GAMMA", DEFAULT_GAMMA)

    @property
    def eps_max(self) -> float:
        """Initial and ceiling RMP tolerance"""
        return self._float("PDCGM_EPS_MAX", DEFAULT_EPS_MAX)

    @property
    def max_outer(self) -> int:
        return self._int("PDCGM_MAX_OUTER", DEFAULT_MAX_OUTER)

    @property
    def workers(self) -> int:
        """Threads used for independent subproblems"""
        return max(1, self._int("PDCGM_WORKERS", 1))

    @property
    def ipm_max_iter(self) -> int:
        return self._int("PDCGM_IPM_MAX_ITER", DEFAULT_IPM_MAX_ITER)

    def driver_config(self, application: str, **overrides) -> DriverConfig:
        """
        Build the driver configuration for an application

        Args:
            application: 'mcnf', 'tssp' or 'quadratic'
            **overrides: DriverConfig fields to replace; None values are ignored

        Returns:
            Validated DriverConfig
        """
        if application not in self.APPLICATION_DEFAULTS:
            raise ValueError(f"Unknown application: {application}")
        delta, degree = self.APPLICATION_DEFAULTS[application]
        values = {
            "delta": self._float("PDCGM_DELTA", delta),
            "degree": self._float("PDCGM_DEGREE", degree),
            "eps_max": self.eps_max,
            "gamma": self.gamma,
            "mode": DriverMode.PDCGM,
            "max_outer": self.max_outer,
            "workers": self.workers,
            "ipm_max_iter": self.ipm_max_iter,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        if isinstance(values["mode"], str):
            values["mode"] = DriverMode(values["mode"])
        return DriverConfig(**values)


# Global config instance
config = Config()
