"""Probabilistic monthly-rainfall scenario generation.

Two-stage stochastic model of monthly precipitation: an ARMA model of the
yearly totals in their normal range, random injection of wet and dry extreme
years at their historical frequencies, and a deterministic disaggregation of
every generated year into months.
"""

from .arma import (
    ArmaModel,
    OrderSelection,
    WhitenessResult,
    aic_score,
    fit_arma,
    fpe_score,
    residual_whiteness,
    select_order,
    simulate,
)
from .banding import (
    ClassBands,
    ClassFrequencies,
    NormalLimitResult,
    RainfallClass,
    classify_year,
    compute_frequencies,
    compute_normal_limit,
    derive_bands,
)
from .errors import (
    CsvFormatError,
    FitError,
    PipelineError,
    RaingenError,
    SeriesValidationError,
)
from .estimator import RainfallScenarioGenerator
from .ingest import (
    MonthlySeries,
    ValidationReport,
    YearlySeries,
    aggregate_yearly,
    monthly_series_from_array,
    parse_monthly_csv,
    serialize_monthly_csv,
    validate_series,
)
from .report import ComparisonReport, SummaryStats, compare, emit_plot_data, summarize
from .scenario import (
    FittedPipeline,
    ModifiedSeries,
    PipelineConfig,
    PipelineReport,
    Provenance,
    ScenarioEnsemble,
    YearlyScenario,
    build_modified_series,
    fit_pipeline,
    generate_ensemble,
    generate_yearly_scenario,
    run_pipeline,
)
from .seasonality import (
    SeasonalityFactors,
    compute_seasonality,
    disaggregate,
    factors_to_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ArmaModel",
    "ClassBands",
    "ClassFrequencies",
    "ComparisonReport",
    "CsvFormatError",
    "FitError",
    "FittedPipeline",
    "ModifiedSeries",
    "MonthlySeries",
    "NormalLimitResult",
    "OrderSelection",
    "PipelineConfig",
    "PipelineError",
    "PipelineReport",
    "Provenance",
    "RainfallClass",
    "RainfallScenarioGenerator",
    "RaingenError",
    "ScenarioEnsemble",
    "SeasonalityFactors",
    "SeriesValidationError",
    "SummaryStats",
    "ValidationReport",
    "WhitenessResult",
    "YearlyScenario",
    "YearlySeries",
    "aggregate_yearly",
    "aic_score",
    "build_modified_series",
    "classify_year",
    "compare",
    "compute_frequencies",
    "compute_normal_limit",
    "compute_seasonality",
    "derive_bands",
    "disaggregate",
    "emit_plot_data",
    "factors_to_csv",
    "fit_arma",
    "fit_pipeline",
    "fpe_score",
    "generate_ensemble",
    "generate_yearly_scenario",
    "monthly_series_from_array",
    "parse_monthly_csv",
    "residual_whiteness",
    "run_pipeline",
    "select_order",
    "serialize_monthly_csv",
    "simulate",
    "summarize",
    "validate_series",
]
