"""Normal-limit estimation, rainfall classes, and class frequencies.

The normal limit is a robust central mean of the yearly totals, found by
repeatedly trimming values outside the central 80% of the retained data's
range and re-averaging until the mean stabilizes. The retained range defines
the normal band; everything below is dry, everything above is wet, and each
side splits in two: a zero year is "very dry" (droughts matter enough to get
their own class, and zero is a point, not a range), and the wet side splits
at a configurable fraction of the gap between the normal band and the
observed maximum.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .ingest import YearlySeries

# Iterative trimming constants: drop values outside the central 80% of the
# retained range, stop once the mean moves by <= 10%, never retain fewer
# than 50% of the original years.
TRIM_FRACTION = 0.1
MEAN_TOLERANCE = 0.10
MIN_RETAINED_FRACTION = 0.5


class RainfallClass(enum.Enum):
    """The six rainfall classes of a yearly total."""

    VERY_DRY = "very_dry"
    DRY = "dry"
    NORMAL_DOWN = "normal_down"
    NORMAL_UP = "normal_up"
    WET = "wet"
    VERY_WET = "very_wet"


#: Classes injected at random into generated series (the non-normal ones),
#: in priority order for the overflow case.
EXTREME_CLASSES = (
    RainfallClass.VERY_DRY,
    RainfallClass.VERY_WET,
    RainfallClass.DRY,
    RainfallClass.WET,
)


@dataclass(frozen=True)
class NormalLimitResult:
    """Outcome of the iterative trimmed-mean procedure."""

    normal_limit: float
    iterations: int
    retained_indices: tuple[int, ...]
    history: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "normal_limit": self.normal_limit,
            "iterations": self.iterations,
            "retained_indices": list(self.retained_indices),
            "history": list(self.history),
        }


@dataclass(frozen=True)
class ClassBands:
    """Edges separating the six rainfall classes (all in mm)."""

    normal_lower: float
    normal_upper: float
    wet_split: float
    observed_min: float
    observed_max: float
    normal_limit: float

    def __post_init__(self):
        ordered = (
            0.0 <= self.observed_min <= self.normal_lower <= self.normal_limit
            <= self.normal_upper <= self.wet_split <= self.observed_max
        )
        if not ordered:
            raise ValueError(f"band edges out of order: {self}")

    def to_dict(self) -> dict:
        return {
            "normal_lower": self.normal_lower,
            "normal_upper": self.normal_upper,
            "wet_split": self.wet_split,
            "observed_min": self.observed_min,
            "observed_max": self.observed_max,
            "normal_limit": self.normal_limit,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassBands":
        return cls(**{k: float(data[k]) for k in (
            "normal_lower", "normal_upper", "wet_split",
            "observed_min", "observed_max", "normal_limit",
        )})


@dataclass(frozen=True)
class ClassFrequencies:
    """Observed per-class year counts and their empirical frequencies."""

    counts: Mapping[RainfallClass, int]
    n_years: int

    def __post_init__(self):
        counts = {cls: int(self.counts.get(cls, 0)) for cls in RainfallClass}
        if sum(counts.values()) != self.n_years:
            raise ValueError("class counts must sum to the number of years")
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> dict[RainfallClass, float]:
        return {cls: count / self.n_years for cls, count in self.counts.items()}

    def frequency(self, cls: RainfallClass) -> float:
        return self.counts[cls] / self.n_years

    def to_dict(self) -> dict:
        return {
            "n_years": self.n_years,
            "counts": {cls.value: count for cls, count in self.counts.items()},
            "frequencies": {cls.value: f for cls, f in self.frequencies.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassFrequencies":
        counts = {RainfallClass(name): int(c) for name, c in data["counts"].items()}
        return cls(counts, int(data["n_years"]))


def _as_totals(y: Union[YearlySeries, np.ndarray]) -> np.ndarray:
    totals = y.totals if isinstance(y, YearlySeries) else np.asarray(y, dtype=float)
    return totals


def compute_normal_limit(
    y: Union[YearlySeries, np.ndarray],
    *,
    trim_fraction: float = TRIM_FRACTION,
    tolerance: float = MEAN_TOLERANCE,
    min_retained_fraction: float = MIN_RETAINED_FRACTION,
) -> NormalLimitResult:
    """Find the normal limit by iterative range-trimming of yearly totals.

    Each iteration averages the retained totals, then drops values outside
    the central ``1 - 2*trim_fraction`` part of the retained [min, max]
    range. Iteration stops when the mean changes by at most ``tolerance``
    relative to the previous mean (a zero previous mean converges only on a
    zero new mean), when a trim would eliminate nothing, or when it would
    leave fewer than ``min_retained_fraction`` of the original years (the
    trim is then not applied and the last compliant mean is returned).

    Raises
    ------
    ValueError
        If fewer than 4 totals are supplied.
    """
    totals = _as_totals(y)
    n = totals.size
    if n < 4:
        raise ValueError(f"need at least 4 yearly totals, got {n}")
    retained = np.arange(n)
    history: list[float] = []
    prev_mean: float | None = None
    while True:
        mean = float(totals[retained].mean())
        history.append(mean)
        if prev_mean is not None:
            if prev_mean == 0.0:
                if mean == 0.0:
                    break
            elif abs(mean - prev_mean) / abs(prev_mean) <= tolerance:
                break
        current = totals[retained]
        lo, hi = float(current.min()), float(current.max())
        margin = trim_fraction * (hi - lo)
        keep = retained[(current >= lo + margin) & (current <= hi - margin)]
        if keep.size == retained.size:
            break
        if keep.size < min_retained_fraction * n:
            break
        retained = keep
        prev_mean = mean
    return NormalLimitResult(
        normal_limit=history[-1],
        iterations=len(history),
        retained_indices=tuple(int(i) for i in retained),
        history=tuple(history),
    )


def derive_bands(
    result: NormalLimitResult,
    y: Union[YearlySeries, np.ndarray],
    *,
    wet_split_fraction: float = 0.5,
) -> ClassBands:
    """Turn a normal-limit result into the six class edges.

    The normal band is the [min, max] of the retained totals. The wet side
    splits at ``normal_upper + wet_split_fraction * (observed_max -
    normal_upper)``; the dry side needs no split edge because the very-dry
    class is exactly zero.
    """
    if not 0.0 < wet_split_fraction < 1.0:
        raise ValueError("wet_split_fraction must lie strictly between 0 and 1")
    totals = _as_totals(y)
    retained = totals[list(result.retained_indices)]
    normal_lower = float(retained.min())
    normal_upper = float(retained.max())
    observed_min = float(totals.min())
    observed_max = float(totals.max())
    # The mean of the retained totals lies in their range by construction;
    # clamp away the last-ulp rounding of the mean.
    limit = min(max(result.normal_limit, normal_lower), normal_upper)
    wet_split = normal_upper + wet_split_fraction * (observed_max - normal_upper)
    return ClassBands(
        normal_lower=normal_lower,
        normal_upper=normal_upper,
        wet_split=wet_split,
        observed_min=observed_min,
        observed_max=observed_max,
        normal_limit=limit,
    )


def classify_year(value: float, bands: ClassBands) -> RainfallClass:
    """Assign a yearly total to exactly one of the six classes.

    Zero is always very dry (zero is recorded only for actual droughts;
    trace rainfall parses as a small positive value and lands in dry). A
    value equal to the normal limit counts as normal-up.
    """
    if value < 0:
        raise ValueError(f"yearly total must be >= 0, got {value}")
    if value == 0.0:
        return RainfallClass.VERY_DRY
    if value < bands.normal_lower:
        return RainfallClass.DRY
    if value < bands.normal_limit:
        return RainfallClass.NORMAL_DOWN
    if value <= bands.normal_upper:
        return RainfallClass.NORMAL_UP
    if value <= bands.wet_split:
        return RainfallClass.WET
    return RainfallClass.VERY_WET


def compute_frequencies(
    y: Union[YearlySeries, np.ndarray], bands: ClassBands
) -> ClassFrequencies:
    """Count each year's class and return exact counts with frequencies."""
    totals = _as_totals(y)
    counts = {cls: 0 for cls in RainfallClass}
    for value in totals:
        counts[classify_year(float(value), bands)] += 1
    return ClassFrequencies(counts, totals.size)
