from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class EvalResult:
    value: float
    abs_error_bound: float

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class ResidueEstimate:
    """A numerical value with a bound on the truncation/extrapolation error.

    ``truncation`` records the knobs that produced the value (word depth,
    mode count, extrapolation offsets, ...) so outputs are reproducible.
    """

    value: float
    tail_bound: float
    truncation: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)
