"""Deterministic monthly distribution of yearly precipitation.

Each month gets a fixed fraction of the yearly total: the fraction is the
month's share of its year's total, averaged over all years with a nonzero
total. The same twelve fractions apply to every generated year regardless of
how wet it is.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SeriesValidationError
from .ingest import MonthlySeries, YearlySeries, aggregate_yearly


@dataclass(frozen=True, eq=False)
class SeasonalityFactors:
    """Twelve monthly fractions of the yearly total; they sum to one."""

    factors: np.ndarray
    years_used: int

    def __post_init__(self):
        arr = np.array(self.factors, dtype=float)
        if arr.shape != (12,):
            raise ValueError(f"expected 12 factors, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "factors", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeasonalityFactors):
            return NotImplemented
        return self.years_used == other.years_used and np.array_equal(
            self.factors, other.factors
        )

    def to_dict(self) -> dict:
        return {"factors": [float(f) for f in self.factors], "years_used": self.years_used}

    @classmethod
    def from_dict(cls, data: dict) -> "SeasonalityFactors":
        return cls(np.asarray(data["factors"], dtype=float), int(data["years_used"]))


def compute_seasonality(
    series: MonthlySeries, yearly: Optional[YearlySeries] = None
) -> SeasonalityFactors:
    """Average each month's share of its year's total over the record.

    Years with a zero total carry no shape information and are excluded from
    the average (``years_used`` counts the rest). No renormalization is
    applied afterwards: the sum-to-one property holds by construction and is
    asserted by tests, not forced.

    Raises
    ------
    SeriesValidationError
        If every year total is zero (no basis for a distribution), or if
        ``yearly`` does not match the series.
    """
    if yearly is None:
        yearly = aggregate_yearly(series)
    matrix = series.year_matrix()
    totals = yearly.totals
    if totals.size != matrix.shape[0]:
        raise SeriesValidationError(
            "yearly series does not match the monthly record"
        )
    included = totals > 0
    if not included.any():
        raise SeriesValidationError(
            "all year totals are zero; no monthly distribution exists"
        )
    ratios = matrix[included] / totals[included, None]
    return SeasonalityFactors(ratios.mean(axis=0), int(included.sum()))


def disaggregate(total: float, factors: SeasonalityFactors) -> np.ndarray:
    """Split a yearly total into 12 monthly depths via the fixed fractions."""
    if total < 0:
        raise ValueError(f"yearly total must be >= 0, got {total}")
    return total * factors.factors


def factors_to_csv(factors: SeasonalityFactors) -> str:
    """Render the factors as an audit CSV with columns ``month,factor``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["month", "factor"])
    for month, factor in enumerate(factors.factors, start=1):
        writer.writerow([month, repr(float(factor))])
    return buf.getvalue()
