"""Monthly precipitation records: CSV parsing, validation, yearly aggregation.

The accepted CSV schema is ``station,year,month,precip_mm`` (UTF-8, months
1..12, decimal point ``.``). A record must cover a contiguous span of months
with no gaps, hold a whole number of 12-month years, and contain one station
only. Missing data is a hard error, never imputed.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import IO, Iterator, Union

import numpy as np

from .errors import CsvFormatError, SeriesValidationError

CSV_HEADER = ("station", "year", "month", "precip_mm")

# Warn when the OLS slope of yearly totals exceeds this fraction of the
# series mean, per year. Detrending is the caller's job; this only flags it.
TREND_SLOPE_FRACTION = 0.01


@dataclass(frozen=True, eq=False)
class MonthlySeries:
    """A gap-free monthly precipitation record for one station.

    ``values[i]`` is the depth in mm for the i-th month of the record; index
    ``i`` decomposes as year ``i // 12`` and month-of-year ``i % 12 + 1``
    counted from ``start_month``.
    """

    station_id: str
    start_year: int
    values: np.ndarray
    start_month: int = 1

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n_years(self) -> int:
        return self.values.size // 12

    def year_matrix(self) -> np.ndarray:
        """Values reshaped to ``(n_years, 12)``; requires a whole-year length."""
        if self.values.size % 12:
            raise SeriesValidationError(
                f"series length {self.values.size} is not a multiple of 12"
            )
        return self.values.reshape(-1, 12)

    def calendar_index(self) -> Iterator[tuple[int, int]]:
        """Yield the calendar ``(year, month)`` label of each value."""
        for i in range(self.values.size):
            offset = self.start_month - 1 + i
            yield self.start_year + offset // 12, offset % 12 + 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonthlySeries):
            return NotImplemented
        return (
            self.station_id == other.station_id
            and self.start_year == other.start_year
            and self.start_month == other.start_month
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class YearlySeries:
    """Yearly precipitation totals derived from a monthly record."""

    station_id: str
    start_year: int
    totals: np.ndarray

    def __post_init__(self):
        arr = np.array(self.totals, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise SeriesValidationError("yearly series needs at least one total")
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise SeriesValidationError("yearly totals must be finite and >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "totals", arr)

    @property
    def n_years(self) -> int:
        return self.totals.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, YearlySeries):
            return NotImplemented
        return (
            self.station_id == other.station_id
            and self.start_year == other.start_year
            and np.array_equal(self.totals, other.totals)
        )


@dataclass(frozen=True)
class ValidationReport:
    """Findings from :func:`validate_series`; empty ``errors`` means accepted."""

    errors: tuple[tuple[str, str], ...] = ()
    warnings: tuple[tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "errors": [list(e) for e in self.errors],
            "warnings": [list(w) for w in self.warnings],
        }


def parse_monthly_csv(
    source: Union[str, os.PathLike, IO[str]], *, year_start_month: int = 1
) -> MonthlySeries:
    """Parse a ``station,year,month,precip_mm`` CSV into a MonthlySeries.

    ``source`` is a text stream or a path. Rows may arrive in any order and
    are sorted by (year, month). The record must start at ``year_start_month``
    (the first month of the hydrological year, default January) and span whole
    years with no gaps or duplicates.

    Raises
    ------
    CsvFormatError
        On a malformed row, duplicate or missing month, negative or
        non-numeric value, mixed stations, or a partial year.
    """
    if not 1 <= year_start_month <= 12:
        raise ValueError("year_start_month must be in 1..12")
    if hasattr(source, "read"):
        rows = _read_rows(source)  # type: ignore[arg-type]
    else:
        with open(source, "r", encoding="utf-8", newline="") as handle:
            rows = _read_rows(handle)

    rows.sort(key=lambda r: (r[1], r[2]))
    station, first_year, first_month = rows[0][0], rows[0][1], rows[0][2]
    if first_month != year_start_month:
        raise CsvFormatError(
            f"record starts in month {first_month}, expected year-start month "
            f"{year_start_month}; pass the matching --year-start-month"
        )

    values = np.empty(len(rows))
    for i, (st, year, month, precip, line_no) in enumerate(rows):
        if st != station:
            raise CsvFormatError(
                f"line {line_no}: multiple stations in one file "
                f"({st!r} vs {station!r})"
            )
        expected = (first_year - 1) * 12 + (first_month - 1) + i
        actual = (year - 1) * 12 + (month - 1)
        if actual < expected:
            raise CsvFormatError(f"line {line_no}: duplicate month {year}-{month:02d}")
        if actual > expected:
            missing_year = 1 + (expected // 12)
            missing_month = expected % 12 + 1
            raise CsvFormatError(
                f"gap in record: missing {missing_year}-{missing_month:02d}"
            )
        values[i] = precip

    if len(rows) % 12:
        raise CsvFormatError(
            f"incomplete year: {len(rows)} rows is not a multiple of 12"
        )
    return MonthlySeries(station, first_year, values, start_month=first_month)


def _read_rows(stream: IO[str]) -> list[tuple[str, int, int, float, int]]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty input") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise CsvFormatError(
            f"bad header {header!r}, expected {','.join(CSV_HEADER)}"
        )
    rows = []
    for line_no, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != 4:
            raise CsvFormatError(f"line {line_no}: expected 4 fields, got {len(raw)}")
        station = raw[0].strip()
        try:
            year = int(raw[1])
            month = int(raw[2])
            precip = float(raw[3])
        except ValueError:
            raise CsvFormatError(f"line {line_no}: non-numeric field in {raw!r}") from None
        if not 1 <= month <= 12:
            raise CsvFormatError(f"line {line_no}: month {month} outside 1..12")
        if not np.isfinite(precip):
            raise CsvFormatError(f"line {line_no}: non-finite precipitation")
        if precip < 0:
            raise CsvFormatError(f"line {line_no}: negative value {precip}")
        rows.append((station, year, month, precip, line_no))
    if not rows:
        raise CsvFormatError("no data rows")
    return rows


def serialize_monthly_csv(series: MonthlySeries) -> str:
    """Render a series back to the input CSV schema.

    Float values are written with ``repr`` so that parsing the output
    reproduces the series exactly.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for (year, month), value in zip(series.calendar_index(), series.values):
        writer.writerow([series.station_id, year, month, repr(float(value))])
    return buf.getvalue()


def validate_series(series: MonthlySeries) -> ValidationReport:
    """Check hard invariants and heuristics; never raises, never mutates.

    Errors: length not a positive multiple of 12, non-finite entries,
    negative entries. Warning: an OLS linear trend of the yearly totals
    steeper than ``TREND_SLOPE_FRACTION`` of the mean per year (the model
    assumes detrended input).
    """
    errors: list[tuple[str, str]] = []
    warnings: list[tuple[str, str]] = []
    values = series.values
    n = values.size
    if n == 0 or n % 12:
        errors.append(("length", f"series length {n} is not a positive multiple of 12"))
    if n and not np.isfinite(values).all():
        errors.append(("non_finite", "series contains missing or non-finite values"))
    elif n and (values < 0).any():
        errors.append(("negative", "series contains negative values"))

    if not errors and n // 12 >= 2:
        totals = values.reshape(-1, 12).sum(axis=1)
        slope = float(np.polyfit(np.arange(totals.size), totals, 1)[0])
        mean = float(totals.mean())
        if abs(slope) > TREND_SLOPE_FRACTION * mean:
            warnings.append(
                (
                    "trend",
                    f"yearly totals drift by {slope:.4g} mm/yr "
                    f"(> {TREND_SLOPE_FRACTION:.0%} of the mean {mean:.4g} mm); "
                    "detrend the input before modelling",
                )
            )
    return ValidationReport(tuple(errors), tuple(warnings))


def aggregate_yearly(series: MonthlySeries) -> YearlySeries:
    """Sum each block of 12 consecutive months into one yearly total."""
    report = validate_series(series)
    if not report.ok:
        raise SeriesValidationError(
            "; ".join(msg for _, msg in report.errors)
        )
    totals = series.year_matrix().sum(axis=1)
    return YearlySeries(series.station_id, series.start_year, totals)


def monthly_series_from_array(
    X, *, station_id: str = "array", start_year: int = 1, start_month: int = 1
) -> MonthlySeries:
    """Coerce an array-like into a MonthlySeries.

    Accepts a flat sequence of monthly values (length a multiple of 12) or a
    ``(n_years, 12)`` matrix.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 12:
            raise SeriesValidationError(
                f"2-D input must have 12 columns, got {arr.shape[1]}"
            )
        arr = arr.ravel()
    elif arr.ndim != 1:
        raise SeriesValidationError("input must be 1-D monthly values or (n_years, 12)")
    return MonthlySeries(station_id, start_year, arr, start_month=start_month)
