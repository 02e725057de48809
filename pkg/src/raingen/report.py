"""Summary statistics and observed-versus-generated comparison outputs.

The model's acceptance criterion is moment agreement: the mean and variance
of the generated ensemble should resemble the observed record. This module
computes those summaries, their relative differences, a class-frequency
comparison under the fitted bands, and plot-ready per-year percentile data.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import IO, Optional, Union

import numpy as np

from ._util import atomic_write_text, fmt12, round12
from .banding import RainfallClass, classify_year, compute_frequencies
from .ingest import YearlySeries
from .scenario import ScenarioEnsemble

_REL_EPS = 1e-12

PLOT_HEADER = ["year", "observed_total", "ensemble_mean", "ensemble_p10", "ensemble_p90"]


@dataclass(frozen=True)
class SummaryStats:
    """Moments and extremes of a yearly series.

    ``variance`` is the unbiased (n-1) sample variance and is ``None`` for a
    single value: an undefined variance is reported as undefined, never as 0.
    """

    mean: float
    variance: Optional[float]
    min: float
    max: float
    n: int
    zero_year_fraction: float

    def to_dict(self) -> dict:
        return {
            "mean": round12(self.mean),
            "variance": round12(self.variance),
            "min": round12(self.min),
            "max": round12(self.max),
            "n": self.n,
            "zero_year_fraction": round12(self.zero_year_fraction),
        }


@dataclass(frozen=True)
class ComparisonReport:
    """Observed record versus generated ensemble."""

    observed: SummaryStats
    ensemble: SummaryStats
    per_scenario: tuple[SummaryStats, ...]
    mean_rel_diff: float
    variance_rel_diff: Optional[float]
    class_frequencies: Optional[dict]

    def to_dict(self) -> dict:
        return {
            "observed": self.observed.to_dict(),
            "ensemble": self.ensemble.to_dict(),
            "per_scenario": [s.to_dict() for s in self.per_scenario],
            "mean_rel_diff": round12(self.mean_rel_diff),
            "variance_rel_diff": round12(self.variance_rel_diff),
            "class_frequencies": self.class_frequencies,
        }


def summarize(series) -> SummaryStats:
    """Sample mean, unbiased variance, extremes, and zero-year fraction."""
    values = np.asarray(series, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot summarize an empty series")
    variance = float(values.var(ddof=1)) if values.size > 1 else None
    return SummaryStats(
        mean=float(values.mean()),
        variance=variance,
        min=float(values.min()),
        max=float(values.max()),
        n=int(values.size),
        zero_year_fraction=float((values == 0.0).mean()),
    )


def relative_difference(a: float, b: float) -> float:
    """``|a - b| / max(|a|, eps)`` with the observed value as reference."""
    return abs(a - b) / max(abs(a), _REL_EPS)


def compare(observed: YearlySeries, ensemble: ScenarioEnsemble) -> ComparisonReport:
    """Compare observed moments and class frequencies against an ensemble.

    Ensemble statistics pool all scenario-years into one sample;
    per-scenario summaries are kept alongside so the spread between
    scenarios stays visible. The class-frequency section classifies both
    the observed years and every generated year under the ensemble's own
    bands; it is ``None`` for direct-branch ensembles, which carry no bands.
    """
    if ensemble.n_scenarios < 1:
        raise ValueError("ensemble is empty")
    obs_stats = summarize(observed.totals)
    yearly = ensemble.yearly_matrix
    pooled = summarize(yearly.ravel())
    per_scenario = tuple(summarize(row) for row in yearly)

    mean_rel = relative_difference(obs_stats.mean, pooled.mean)
    if obs_stats.variance is None or pooled.variance is None:
        variance_rel = None
    else:
        variance_rel = relative_difference(obs_stats.variance, pooled.variance)

    class_section = None
    bands = ensemble.provenance.bands
    if bands is not None:
        obs_freq = compute_frequencies(observed, bands).frequencies
        counts = {cls: 0 for cls in RainfallClass}
        flat = yearly.ravel()
        for value in flat:
            counts[classify_year(float(value), bands)] += 1
        gen_freq = {cls: c / flat.size for cls, c in counts.items()}
        class_section = {
            cls.value: {
                "observed": round12(obs_freq[cls]),
                "generated": round12(gen_freq[cls]),
                "delta": round12(gen_freq[cls] - obs_freq[cls]),
            }
            for cls in RainfallClass
        }
    return ComparisonReport(
        observed=obs_stats,
        ensemble=pooled,
        per_scenario=per_scenario,
        mean_rel_diff=mean_rel,
        variance_rel_diff=variance_rel,
        class_frequencies=class_section,
    )


def nearest_rank_percentile(values: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: the ``ceil(pct/100 * n)``-th smallest value."""
    ordered = np.sort(np.asarray(values, dtype=float).ravel())
    if ordered.size == 0:
        raise ValueError("cannot take a percentile of nothing")
    rank = max(1, math.ceil(pct / 100.0 * ordered.size))
    return float(ordered[rank - 1])


def plot_data_csv(observed: YearlySeries, ensemble: ScenarioEnsemble) -> tuple[str, list[str]]:
    """Build the per-year comparison table; returns (csv text, warnings).

    Columns: year index (1-based), observed total, ensemble mean, and the
    nearest-rank 10th/90th percentiles across scenarios. When the observed
    record and the scenarios differ in length, the missing side's cells are
    left empty and a warning is returned.
    """
    warnings: list[str] = []
    yearly = ensemble.yearly_matrix
    n_obs = observed.n_years
    n_gen = ensemble.n_years
    if n_obs != n_gen:
        warnings.append(
            f"observed record has {n_obs} years but scenarios have {n_gen}; "
            "rows beyond the shorter side are left blank"
        )
    buf = io.StringIO()
    buf.write("# percentile_method: nearest-rank\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLOT_HEADER)
    for idx in range(max(n_obs, n_gen)):
        obs = fmt12(observed.totals[idx]) if idx < n_obs else ""
        if idx < n_gen:
            column = yearly[:, idx]
            mean = fmt12(float(column.mean()))
            p10 = fmt12(nearest_rank_percentile(column, 10))
            p90 = fmt12(nearest_rank_percentile(column, 90))
        else:
            mean = p10 = p90 = ""
        writer.writerow([idx + 1, obs, mean, p10, p90])
    return buf.getvalue(), warnings


def emit_plot_data(
    observed: YearlySeries,
    ensemble: ScenarioEnsemble,
    destination: Union[str, os.PathLike, IO[str]],
) -> list[str]:
    """Write the plot-data CSV to a path (atomically) or a text stream."""
    text, warnings = plot_data_csv(observed, ensemble)
    if hasattr(destination, "write"):
        destination.write(text)  # type: ignore[union-attr]
    else:
        atomic_write_text(destination, text)
    return warnings
