#!/usr/bin/env python3
"""
Experiment Configuration
Validated parameters of one CLI run, merged from a JSON config file and flags.
"""
from math import atanh, tanh
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional
import json
import logging

from pydantic import BaseModel, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

DEFAULT_SQUEEZING = 0.5


class ExperimentConfig(BaseModel):
    """Parameters of a verify, sample or scan run"""

    model: Literal['tsbs', 'squeezed', 'homodyne', 'embed', 'herald']
    modes: int = Field(2, ge=1)
    photons: int = Field(1, ge=0)
    squeezing: Optional[float] = None
    xi: Optional[float] = None
    eta: float = Field(0.1, gt=0)
    seed: int = Field(7, ge=0, lt=2 ** 64)
    shots: int = Field(1000, ge=1)
    trials: int = Field(5, ge=1)
    max_photons: Optional[int] = Field(None, ge=0)
    out: Optional[str] = None
    format: Literal['json', 'csv'] = 'json'
    grid: Optional[str] = None

    @field_validator('squeezing')
    @classmethod
    def _check_squeezing(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 <= value < 1.0:
            raise ValueError(f"squeezing t must lie in [0, 1), got {value}")
        return value

    @model_validator(mode='after')
    def _derive_squeezing(self) -> 'ExperimentConfig':
        if self.photons > self.modes:
            raise ValueError(f"photons ({self.photons}) must not exceed modes ({self.modes})")
        if self.squeezing is None and self.xi is None:
            self.squeezing = DEFAULT_SQUEEZING
        if self.squeezing is None:
            self.squeezing = abs(tanh(self.xi))
        elif self.xi is None:
            self.xi = atanh(self.squeezing)
        elif abs(tanh(abs(self.xi)) - self.squeezing) > 1e-12:
            raise ValueError(f"xi={self.xi} and squeezing={self.squeezing} disagree (t = tanh xi)")
        return self

    def grid_values(self) -> List[float]:
        """Parse `grid` as "a,b,c" or "start:stop:count" """
        if not self.grid or not self.grid.strip():
            raise ValueError("Empty parameter grid")
        text = self.grid.strip()
        if ':' in text:
            parts = text.split(':')
            if len(parts) != 3:
                raise ValueError(f"Range grid needs start:stop:count, got {text!r}")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError(f"Range grid needs a positive count, got {count}")
            if count == 1:
                return [start]
            step = (stop - start) / (count - 1)
            return [start + i * step for i in range(count)]
        values = [float(item) for item in text.split(',') if item.strip()]
        if not values:
            raise ValueError("Empty parameter grid")
        return values

    @classmethod
    def from_sources(cls, config_file: Optional[str] = None,
                     overrides: Optional[Dict[str, Any]] = None) -> 'ExperimentConfig':
        """Merge a JSON config file with flag overrides; flags win

        Args:
            config_file: Optional path to a JSON object of fields
            overrides: Flag values; None entries are ignored

        Returns:
            ExperimentConfig: Validated configuration
        """
        merged: Dict[str, Any] = {}
        if config_file:
            merged.update(json.loads(Path(config_file).read_text()))
            logger.debug(f"Loaded experiment config from {config_file}")
        merged.update({key: value for key, value in (overrides or {}).items() if value is not None})
        return cls(**merged)
