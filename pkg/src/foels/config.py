"""Detector thresholds and their ``key value`` text form."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields

from .errors import ParseError
from .foe import RansacParams
from .probability import LikelihoodParams


@dataclass(frozen=True)
class DetectorConfig:
    """Every tunable of the detector. Angles are in degrees."""

    tau_static: float = 0.3
    tau_move: float = 0.1
    eps_mag: float = 0.5
    min_mag: float = 0.5
    alpha: float = 0.25
    theta_th: float = 30.0
    theta_inlier: float = 1.0
    iterations: int = 512
    seed: int = 0
    tau_pixel: float = 0.25
    tau_obj: float = 0.01
    m_stop: float = 1.0
    eps_len: float = 1e-3
    fl_cap: float = 4.0

    def __post_init__(self):
        for name in ("tau_static", "tau_move", "tau_pixel"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not 0.0 <= self.tau_obj < 1.0:
            raise ValueError("tau_obj must lie in [0, 1)")
        self.ransac_params()
        self.likelihood_params()

    def ransac_params(self) -> RansacParams:
        return RansacParams(self.iterations, math.radians(self.theta_inlier), self.min_mag, self.seed)

    def likelihood_params(self) -> LikelihoodParams:
        return LikelihoodParams(self.alpha, math.radians(self.theta_th), self.eps_len,
                                self.fl_cap, self.m_stop, self.eps_mag, self.min_mag)

    def replace(self, **changes) -> "DetectorConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name} {getattr(self, f.name)!r}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str, base: "DetectorConfig | None" = None) -> "DetectorConfig":
        """Parse ``key value`` lines over ``base`` (defaults if omitted)."""
        types = {f.name: f.type for f in fields(cls)}
        changes = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"config line {lineno}: expected 'key value', got {raw!r}")
            key, value = parts
            if key not in types:
                raise ParseError(f"config line {lineno}: unknown key {key!r}")
            try:
                changes[key] = int(value) if types[key] in (int, "int") else float(value)
            except ValueError:
                raise ParseError(f"config line {lineno}: bad value {value!r} for {key}") from None
        try:
            return dataclasses.replace(base or cls(), **changes)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
