#!/usr/bin/env python3
"""
Configuration Module
Handles environment variable loading and validation for the numerical kernels
"""
import os
import logging
from typing import Optional, Dict, Any

logger = logging.getLogger(__name__)


class Config:
    """Toolkit configuration from environment variables"""

    # Application settings
    APP_NAME: str = "bs-sim"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "text"

    # Parallel evaluation
    WORKERS: int = 1
    PERMANENT_CHUNKS: int = 16
    PARALLEL_MIN_ORDER: int = 12
    SAMPLE_BLOCK: int = 4096

    # Numerical tolerances
    QUADRATURE_ORDER: int = 16
    QUADRATURE_TOLERANCE: float = 1e-8
    TAIL_TOLERANCE: float = 1e-12

    # Desk-scale feasibility bounds
    MAX_TSBS_MODES: int = 10
    MAX_PHOTONS: int = 6
    LOG_SPACE_MODES: int = 16

    MIN_QUADRATURE_ORDER: int = 16

    @classmethod
    def load(cls) -> None:
        """Load configuration from environment variables"""
        cls.APP_NAME = cls._get_env('APP_NAME', cls.APP_NAME)
        cls.LOG_LEVEL = cls._get_env('LOG_LEVEL', cls.LOG_LEVEL).upper()
        cls.LOG_FORMAT = cls._get_env('BSIM_LOG_FORMAT', cls.LOG_FORMAT).lower()

        cls.WORKERS = cls._get_env_int('BSIM_WORKERS', cls.WORKERS)
        cls.PERMANENT_CHUNKS = cls._get_env_int('BSIM_PERMANENT_CHUNKS', cls.PERMANENT_CHUNKS)
        cls.PARALLEL_MIN_ORDER = cls._get_env_int('BSIM_PARALLEL_MIN_ORDER', cls.PARALLEL_MIN_ORDER)
        cls.SAMPLE_BLOCK = cls._get_env_int('BSIM_SAMPLE_BLOCK', cls.SAMPLE_BLOCK)

        cls.QUADRATURE_ORDER = cls._get_env_int('BSIM_QUADRATURE_ORDER', cls.QUADRATURE_ORDER)
        cls.QUADRATURE_TOLERANCE = cls._get_env_float('BSIM_QUADRATURE_TOLERANCE', cls.QUADRATURE_TOLERANCE)
        cls.TAIL_TOLERANCE = cls._get_env_float('BSIM_TAIL_TOLERANCE', cls.TAIL_TOLERANCE)

        cls.MAX_TSBS_MODES = cls._get_env_int('BSIM_MAX_TSBS_MODES', cls.MAX_TSBS_MODES)
        cls.MAX_PHOTONS = cls._get_env_int('BSIM_MAX_PHOTONS', cls.MAX_PHOTONS)
        cls.LOG_SPACE_MODES = cls._get_env_int('BSIM_LOG_SPACE_MODES', cls.LOG_SPACE_MODES)

        cls._validate()

        logger.debug(f"Configuration loaded: workers={cls.WORKERS}, chunks={cls.PERMANENT_CHUNKS}, "
                     f"quadrature_order={cls.QUADRATURE_ORDER}")

    @classmethod
    def _get_env(cls, key: str, default: Optional[str] = None) -> Optional[str]:
        """Get environment variable as string

        Args:
            key: Environment variable name
            default: Default value if not set

        Returns:
            Optional[str]: Environment variable value or default
        """
        return os.getenv(key, default)

    @classmethod
    def _get_env_int(cls, key: str, default: int) -> int:
        """Get environment variable as integer

        Args:
            key: Environment variable name
            default: Default value if not set or invalid

        Returns:
            int: Environment variable value as integer or default
        """
        value = os.getenv(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            logger.warning(f"Invalid integer value for {key}: {value}, using default: {default}")
            return default

    @classmethod
    def _get_env_float(cls, key: str, default: float) -> float:
        """Get environment variable as float, falling back to the default on bad input"""
        value = os.getenv(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            logger.warning(f"Invalid float value for {key}: {value}, using default: {default}")
            return default

    @classmethod
    def _validate(cls) -> None:
        """Validate configuration values

        Raises:
            ValueError: If configuration validation fails
        """
        errors = []

        valid_log_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if cls.LOG_LEVEL not in valid_log_levels:
            errors.append(f"Invalid LOG_LEVEL: {cls.LOG_LEVEL} (must be one of {valid_log_levels})")

        valid_log_formats = ['text', 'json']
        if cls.LOG_FORMAT not in valid_log_formats:
            errors.append(f"Invalid BSIM_LOG_FORMAT: {cls.LOG_FORMAT} (must be one of {valid_log_formats})")

        if cls.WORKERS < 1:
            errors.append(f"Invalid BSIM_WORKERS: {cls.WORKERS} (must be >= 1)")

        if cls.PERMANENT_CHUNKS < 1:
            errors.append(f"Invalid BSIM_PERMANENT_CHUNKS: {cls.PERMANENT_CHUNKS} (must be >= 1)")

        if cls.PARALLEL_MIN_ORDER < 2:
            errors.append(f"Invalid BSIM_PARALLEL_MIN_ORDER: {cls.PARALLEL_MIN_ORDER} (must be >= 2)")

        if cls.SAMPLE_BLOCK < 1:
            errors.append(f"Invalid BSIM_SAMPLE_BLOCK: {cls.SAMPLE_BLOCK} (must be >= 1)")

        if cls.QUADRATURE_ORDER < cls.MIN_QUADRATURE_ORDER:
            errors.append(f"Invalid BSIM_QUADRATURE_ORDER: {cls.QUADRATURE_ORDER} "
                          f"(must be >= {cls.MIN_QUADRATURE_ORDER})")

        if not 0 < cls.QUADRATURE_TOLERANCE < 1:
            errors.append(f"Invalid BSIM_QUADRATURE_TOLERANCE: {cls.QUADRATURE_TOLERANCE} (must be in (0, 1))")

        if not 0 < cls.TAIL_TOLERANCE < 1:
            errors.append(f"Invalid BSIM_TAIL_TOLERANCE: {cls.TAIL_TOLERANCE} (must be in (0, 1))")

        if cls.MAX_TSBS_MODES < 1:
            errors.append(f"Invalid BSIM_MAX_TSBS_MODES: {cls.MAX_TSBS_MODES} (must be >= 1)")

        if cls.MAX_PHOTONS < 0:
            errors.append(f"Invalid BSIM_MAX_PHOTONS: {cls.MAX_PHOTONS} (must be >= 0)")

        if cls.LOG_SPACE_MODES < 1:
            errors.append(f"Invalid BSIM_LOG_SPACE_MODES: {cls.LOG_SPACE_MODES} (must be >= 1)")

        if cls.WORKERS > 1 and cls.PERMANENT_CHUNKS < cls.WORKERS:
            logger.warning(f"BSIM_PERMANENT_CHUNKS={cls.PERMANENT_CHUNKS} is below BSIM_WORKERS={cls.WORKERS}; "
                           f"some workers will stay idle")

        if errors:
            error_msg = "Configuration validation errors:\n" + "\n".join(f"  - {e}" for e in errors)
            logger.error(error_msg)
            raise ValueError(error_msg)

    @classmethod
    def get_summary(cls) -> Dict[str, Any]:
        """Get configuration summary for embedding in reports"""
        return {
            'app_name': cls.APP_NAME,
            'app_version': cls.APP_VERSION,
            'log_level': cls.LOG_LEVEL,
            'log_format': cls.LOG_FORMAT,
            'workers': cls.WORKERS,
            'permanent_chunks': cls.PERMANENT_CHUNKS,
            'parallel_min_order': cls.PARALLEL_MIN_ORDER,
            'sample_block': cls.SAMPLE_BLOCK,
            'quadrature_order': cls.QUADRATURE_ORDER,
            'quadrature_tolerance': cls.QUADRATURE_TOLERANCE,
            'tail_tolerance': cls.TAIL_TOLERANCE,
            'max_tsbs_modes': cls.MAX_TSBS_MODES,
            'max_photons': cls.MAX_PHOTONS,
            'log_space_modes': cls.LOG_SPACE_MODES,
        }


# Load configuration on module import
Config.load()
