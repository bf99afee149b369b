#!/usr/bin/env python3
"""
Distribution Tables
Discrete probability tables over occupation patterns or phase-space boxes,
with provenance metadata and CSV/JSON export.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple
import csv
import json
import logging

import numpy as np

from bsim.errors import DimensionError, UnnormalizedTableError

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9
NEGATIVE_CLIP = 1e-12


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip a double"""
    return format(float(value), '.17g')


@dataclass(eq=False)
class DistributionTable:
    """Probabilities over an ordered support

    A truncated table carries the missing mass in `residual`.
    """
    support: List[Tuple[int, ...]]
    probs: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)
    residual: float = 0.0

    def __post_init__(self):
        self.support = [tuple(int(v) for v in item) for item in self.support]
        probs = np.asarray(self.probs, dtype=float).ravel()
        if probs.size != len(self.support):
            raise DimensionError(f"{probs.size} probabilities for {len(self.support)} support points")
        if probs.size and probs.min() < -NEGATIVE_CLIP:
            raise UnnormalizedTableError(f"Negative probability {probs.min():.3e} in table")
        if probs.size and probs.min() < 0.0:
            logger.warning(f"Clipping negative round-off probabilities (min {probs.min():.3e})")
            probs = np.clip(probs, 0.0, None)
        self.probs = probs
        self._index = {item: i for i, item in enumerate(self.support)}

    def __len__(self) -> int:
        return len(self.support)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    @property
    def normalized(self) -> bool:
        return abs(self.total - 1.0) <= NORMALIZATION_TOLERANCE

    def probability(self, item: Sequence[int]) -> float:
        index = self._index.get(tuple(int(v) for v in item))
        return 0.0 if index is None else float(self.probs[index])

    @classmethod
    def from_counts(cls, support: Sequence[Sequence[int]], counts: Sequence[int],
                    metadata: Optional[Dict[str, Any]] = None) -> 'DistributionTable':
        """Empirical frequencies from per-cell counts"""
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total <= 0:
            raise UnnormalizedTableError("Cannot build an empirical table from zero counts")
        meta = dict(metadata or {})
        meta.setdefault('shots', int(total))
        return cls(list(support), counts / total, meta)

    def to_json(self) -> Dict[str, Any]:
        return {
            'metadata': self.metadata,
            'support': [list(item) for item in self.support],
            'probs': [float(p) for p in self.probs],
            'residual': float(self.residual),
        }

    def to_csv(self, stream: TextIO) -> None:
        """Write `#` metadata lines, then pattern,probability rows"""
        for key, value in self.metadata.items():
            stream.write(f"# {key}={json.dumps(value, default=str)}\n")
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['pattern', 'probability'])
        for item, prob in zip(self.support, self.probs):
            writer.writerow([' '.join(str(v) for v in item), format_float(prob)])
