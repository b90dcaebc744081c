"""
CRFVE Edge Schwarz - Experiment Configuration
=============================================

Precedence: dataclass defaults < JSON file < preset < explicit overrides.
"""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..core import DIAGONALS, MONITORS, PRESETS, VARIANTS, InvalidParameterError, preset_mask


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One solve of the preconditioned CRFVE system.

    Attributes:
        n: Fine blocks per side (h = 1/n)
        m: Subdomains per side (H = 1/m)
        freq: Frequency of the oscillatory base coefficient, 0 for A = 1
        alpha1: Multiplier on the red subdomains
        red_mask: Red subdomain indices (row-major)
        preset: Name of a red-region preset, recorded for reports
        variant: 'sym' or 'nsym'
        tol: Relative reduction of the monitored residual
        monitor: Stopping norm: 'system' (b_FV - B_FV u), 'l2' or 'inner'
        maxit: GMRES iteration cap
        rhs: Constant source value f
        seed: Seed for randomized checks
        diagonal: Block diagonal orientation, 'ne' or 'nw'
        workers: Sweep pool size
    """
    n: int = 32
    m: int = 4
    freq: int = 10
    alpha1: float = 1.0
    red_mask: List[int] = field(default_factory=list)
    preset: Optional[str] = None
    variant: str = "sym"
    tol: float = 1e-6
    monitor: str = "system"
    maxit: int = 200
    rhs: float = 1.0
    seed: int = 0
    diagonal: str = "ne"
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.n < 2:
            raise InvalidParameterError(f"n must be >= 2, got {self.n}")
        if self.m < 1 or self.n % self.m != 0:
            raise InvalidParameterError(f"m={self.m} must divide n={self.n}")
        if not 0 < self.tol < 1:
            raise InvalidParameterError(f"tol must lie in (0, 1), got {self.tol}")
        if self.alpha1 <= 0:
            raise InvalidParameterError(f"alpha1 must be positive, got {self.alpha1}")
        if self.freq < 0:
            raise InvalidParameterError(f"freq must be >= 0, got {self.freq}")
        if self.maxit < 1:
            raise InvalidParameterError(f"maxit must be >= 1, got {self.maxit}")
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.monitor not in MONITORS:
            raise InvalidParameterError(f"monitor must be one of {MONITORS}, got {self.monitor!r}")
        if self.diagonal not in DIAGONALS:
            raise InvalidParameterError(f"diagonal must be one of {DIAGONALS}, got {self.diagonal!r}")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {self.workers}")
        if any(k < 0 or k >= self.m * self.m for k in self.red_mask):
            raise InvalidParameterError(f"red_mask entries must lie in [0, {self.m * self.m})")
        return self

    @property
    def n_subdomains(self) -> int:
        return self.m * self.m

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out['red_mask'] = list(self.red_mask)
        return out

    def with_overrides(self, **kwargs: Any) -> "ExperimentConfig":
        """Copy with the given fields replaced; None values and unknown keys are ignored."""
        names = {f.name for f in fields(self)}
        changes = {k: v for k, v in kwargs.items() if k in names and v is not None}
        if 'red_mask' in changes:
            changes['red_mask'] = [int(k) for k in changes['red_mask']]
        return replace(self, **changes)

    def with_preset(self, name: str) -> "ExperimentConfig":
        """Apply a red-region preset (n, m, freq and mask)."""
        if name not in PRESETS:
            raise InvalidParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        p = PRESETS[name]
        return replace(self, n=p['n'], m=p['m'], freq=p['freq'],
                       red_mask=preset_mask(name), preset=name)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {unknown}")
        return cls().with_overrides(**data)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ExperimentConfig":
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise InvalidParameterError(f"config root must be an object: {path}")
        return cls.from_dict(data)


def load_config(path: Optional[Union[str, Path]] = None, preset: Optional[str] = None,
                **overrides: Any) -> ExperimentConfig:
    """
    Resolve a config from defaults, an optional JSON file, an optional
    preset and explicit overrides, in that order, then validate it.
    """
    config = ExperimentConfig.from_json(path) if path else ExperimentConfig()
    if preset:
        config = config.with_preset(preset)
    return config.with_overrides(**overrides).validate()
