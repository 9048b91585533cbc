from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class BoundEstimate:
    """Numeric bracket ``lower <= ||T||_e <= upper`` with its provenance."""

    lower: float
    upper: float
    method: str
    witness: Optional[Any] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = float(self.lower)
        self.upper = float(self.upper)
        if self.lower < 0 or math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")
        # tolerate last-bit rounding between two routes to the same value
        if self.lower > self.upper * (1 + 1e-12) + 1e-300:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> float:
        """Midpoint of the bracket (equal to both ends when exact)."""
        if math.isinf(self.upper):
            return math.inf
        return 0.5 * (self.lower + self.upper)
