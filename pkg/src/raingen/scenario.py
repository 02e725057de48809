"""Scenario generation: modified series, extreme-year injection, pipeline.

A fitted pipeline holds everything generation needs: the seasonal monthly
fractions, the yearly ARMA model, and (when the yearly series could not be
modelled directly) the class bands and empirical class frequencies. Each
scenario is a simulated yearly series with extreme years substituted in at
random positions, then disaggregated to months.

Per-scenario random streams are spawned from one master seed, so an
ensemble is a pure function of (inputs, config, master_seed) regardless of
the order or parallelism of generation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .arma import ArmaModel, OrderSelection, fit_arma, select_order, simulate
from .banding import (
    EXTREME_CLASSES,
    ClassBands,
    ClassFrequencies,
    NormalLimitResult,
    RainfallClass,
    classify_year,
    compute_frequencies,
    compute_normal_limit,
    derive_bands,
)
from .errors import FitError, PipelineError, SeriesValidationError
from .ingest import MonthlySeries, ValidationReport, YearlySeries, aggregate_yearly, validate_series
from .seasonality import SeasonalityFactors, compute_seasonality

_MIN_MODIFIED_YEARS = 4


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable knobs of the modelling pipeline."""

    max_p: int = 3
    max_q: int = 3
    wet_split_fraction: float = 0.5
    deterministic_counts: bool = False
    n_scenarios: int = 100
    n_years: Optional[int] = None  # None: match the input record
    master_seed: Optional[int] = None  # None: fresh entropy, recorded in the output

    def __post_init__(self):
        if self.max_p < 0 or self.max_q < 0:
            raise ValueError("max_p and max_q must be >= 0")
        if not 0.0 < self.wet_split_fraction < 1.0:
            raise ValueError("wet_split_fraction must lie strictly between 0 and 1")
        if self.n_scenarios < 1:
            raise ValueError("n_scenarios must be >= 1")
        if self.n_years is not None and self.n_years < 1:
            raise ValueError("n_years must be >= 1")

    def to_dict(self) -> dict:
        return {
            "max_p": self.max_p,
            "max_q": self.max_q,
            "wet_split_fraction": self.wet_split_fraction,
            "deterministic_counts": self.deterministic_counts,
            "n_scenarios": self.n_scenarios,
            "n_years": self.n_years,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True, eq=False)
class ModifiedSeries:
    """Yearly totals with every non-normal year removed."""

    totals: np.ndarray
    removed: tuple[tuple[int, RainfallClass, float], ...]

    def __post_init__(self):
        arr = np.array(self.totals, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "totals", arr)


@dataclass(frozen=True, eq=False)
class YearlyScenario:
    """One generated yearly series plus its injected extreme years."""

    totals: np.ndarray
    injected: tuple[tuple[int, RainfallClass, float], ...]
    n_clamped: int = 0
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.array(self.totals, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "totals", arr)


@dataclass(frozen=True)
class Provenance:
    """Everything an ensemble was generated from."""

    branch: str  # "direct" or "banded"
    seasonality: SeasonalityFactors
    model: ArmaModel
    bands: Optional[ClassBands]
    frequencies: Optional[ClassFrequencies]

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "seasonality": self.seasonality.to_dict(),
            "model": self.model.to_dict(),
            "bands": self.bands.to_dict() if self.bands else None,
            "frequencies": self.frequencies.to_dict() if self.frequencies else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Provenance":
        return cls(
            branch=data["branch"],
            seasonality=SeasonalityFactors.from_dict(data["seasonality"]),
            model=ArmaModel.from_dict(data["model"]),
            bands=ClassBands.from_dict(data["bands"]) if data.get("bands") else None,
            frequencies=(
                ClassFrequencies.from_dict(data["frequencies"])
                if data.get("frequencies")
                else None
            ),
        )


@dataclass(frozen=True)
class FittedPipeline:
    """Fitted artifacts of the modelling pipeline, ready for generation."""

    provenance: Provenance
    yearly: YearlySeries
    validation: ValidationReport
    config: PipelineConfig
    direct_selection: Optional[OrderSelection] = None
    normal_limit: Optional[NormalLimitResult] = None
    modified: Optional[ModifiedSeries] = None
    modified_selection: Optional[OrderSelection] = None


@dataclass(frozen=True, eq=False)
class ScenarioEnsemble:
    """K generated scenarios sharing one provenance and master seed."""

    scenarios: tuple[YearlyScenario, ...]
    monthly: np.ndarray  # (K, L, 12)
    master_seed: int
    provenance: Provenance

    def __post_init__(self):
        arr = np.array(self.monthly, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "monthly", arr)

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def n_years(self) -> int:
        return self.monthly.shape[1]

    @property
    def yearly_matrix(self) -> np.ndarray:
        """Scenario yearly totals as a ``(K, L)`` array."""
        return np.stack([s.totals for s in self.scenarios])


@dataclass(frozen=True)
class PipelineReport:
    """What the pipeline did, with all intermediate artifacts."""

    branch: str
    validation: ValidationReport
    provenance: Provenance
    direct_selection: Optional[OrderSelection]
    normal_limit: Optional[NormalLimitResult]
    modified_selection: Optional[OrderSelection]
    n_removed_years: Optional[int]
    master_seed: int
    n_scenarios: int
    n_years: int
    clamp_count: int
    injection_warnings: tuple[str, ...]
    config: PipelineConfig

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "validation": self.validation.to_dict(),
            "provenance": self.provenance.to_dict(),
            "direct_selection": (
                self.direct_selection.to_dict() if self.direct_selection else None
            ),
            "normal_limit": self.normal_limit.to_dict() if self.normal_limit else None,
            "modified_selection": (
                self.modified_selection.to_dict() if self.modified_selection else None
            ),
            "n_removed_years": self.n_removed_years,
            "master_seed": self.master_seed,
            "n_scenarios": self.n_scenarios,
            "n_years": self.n_years,
            "clamp_count": self.clamp_count,
            "injection_warnings": list(self.injection_warnings),
            "config": self.config.to_dict(),
        }


def build_modified_series(y: YearlySeries, bands: ClassBands) -> ModifiedSeries:
    """Drop every wet/dry year, keeping the normal ones in original order."""
    retained: list[float] = []
    removed: list[tuple[int, RainfallClass, float]] = []
    for idx, value in enumerate(y.totals):
        cls = classify_year(float(value), bands)
        if cls in (RainfallClass.NORMAL_DOWN, RainfallClass.NORMAL_UP):
            retained.append(float(value))
        else:
            removed.append((idx, cls, float(value)))
    if len(retained) < _MIN_MODIFIED_YEARS:
        raise SeriesValidationError(
            f"only {len(retained)} normal years remain; "
            f"need >= {_MIN_MODIFIED_YEARS} to fit the modified series"
        )
    return ModifiedSeries(np.asarray(retained), tuple(removed))


def _class_interval(cls: RainfallClass, bands: ClassBands) -> tuple[float, float]:
    if cls is RainfallClass.DRY:
        return 0.0, bands.normal_lower
    if cls is RainfallClass.WET:
        return bands.normal_upper, bands.wet_split
    if cls is RainfallClass.VERY_WET:
        return bands.wet_split, bands.observed_max
    raise ValueError(f"{cls} has no sampling interval")


def _draw_in_class(
    rng: np.random.Generator, cls: RainfallClass, bands: ClassBands
) -> float:
    """Uniform draw from the class interval, guaranteed to classify back to it."""
    if cls is RainfallClass.VERY_DRY:
        return 0.0
    lo, hi = _class_interval(cls, bands)
    if not hi > lo:
        raise ValueError(
            f"cannot draw a {cls.value} year: its interval ({lo}, {hi}] is empty"
        )
    while True:
        value = float(rng.uniform(lo, hi))
        if classify_year(value, bands) is cls:
            return value


def generate_yearly_scenario(
    model: ArmaModel,
    frequencies: Optional[ClassFrequencies],
    bands: Optional[ClassBands],
    length: int,
    rng: np.random.Generator,
    *,
    deterministic_counts: bool = False,
) -> YearlyScenario:
    """Simulate a yearly series and substitute random extreme years into it.

    The base series comes from the ARMA model; negative base values are
    clamped to the lower edge of the normal band (to zero when no bands
    exist, i.e. in the direct branch), because zero totals are reserved for
    injected very-dry years. Per extreme class the number of injected years
    is Binomial(length, class frequency) — or ``round(f * length)`` with
    ``deterministic_counts`` — and all injected years land on distinct
    positions drawn without replacement. Injected values are uniform in the
    class interval; very-dry years are exactly zero.

    If the class draws together exceed ``length`` (possible only when the
    extreme frequencies sum near 1), positions are filled in priority order
    very-dry, very-wet, dry, wet, and a warning is recorded.
    """
    if length < 1:
        raise ValueError("scenario length must be >= 1")
    if frequencies is not None and bands is None:
        raise ValueError("injection frequencies require class bands")
    base = simulate(model, length, rng)
    floor = bands.normal_lower if bands is not None else 0.0
    clamped = base < floor
    base[clamped] = floor
    n_clamped = int(clamped.sum())

    injected: list[tuple[int, RainfallClass, float]] = []
    warnings: list[str] = []
    if frequencies is not None:
        desired: dict[RainfallClass, int] = {}
        for cls in EXTREME_CLASSES:
            f = frequencies.frequency(cls)
            if deterministic_counts:
                desired[cls] = int(math.floor(f * length + 0.5))
            else:
                desired[cls] = int(rng.binomial(length, f))
        total = sum(desired.values())
        if total > length:
            warnings.append(
                f"extreme-year draws ({total}) exceed scenario length ({length}); "
                "filled by priority very_dry, very_wet, dry, wet"
            )
            remaining = length
            for cls in EXTREME_CLASSES:
                desired[cls] = min(desired[cls], remaining)
                remaining -= desired[cls]
            total = length
        if total:
            positions = rng.choice(length, size=total, replace=False)
            cursor = 0
            for cls in EXTREME_CLASSES:
                for _ in range(desired[cls]):
                    pos = int(positions[cursor])
                    cursor += 1
                    value = _draw_in_class(rng, cls, bands)
                    base[pos] = value
                    injected.append((pos, cls, value))
    injected.sort(key=lambda item: item[0])
    return YearlyScenario(base, tuple(injected), n_clamped, tuple(warnings))


def generate_ensemble(
    fitted: FittedPipeline,
    n_scenarios: int,
    n_years: Optional[int] = None,
    master_seed: Optional[int] = None,
) -> ScenarioEnsemble:
    """Generate K scenarios, each on its own random stream.

    Stream i is spawned deterministically from ``(master_seed, i)``; the
    entropy actually used is recorded on the ensemble so a run without an
    explicit seed can still be reproduced.
    """
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be >= 1")
    length = fitted.yearly.n_years if n_years is None else n_years
    if length < 1:
        raise ValueError("n_years must be >= 1")
    prov = fitted.provenance
    seed_seq = np.random.SeedSequence(master_seed)
    factors = prov.seasonality.factors
    scenarios: list[YearlyScenario] = []
    monthly = np.empty((n_scenarios, length, 12))
    for i, child in enumerate(seed_seq.spawn(n_scenarios)):
        rng = np.random.default_rng(child)
        scenario = generate_yearly_scenario(
            prov.model,
            prov.frequencies,
            prov.bands,
            length,
            rng,
            deterministic_counts=fitted.config.deterministic_counts,
        )
        scenarios.append(scenario)
        monthly[i] = scenario.totals[:, None] * factors[None, :]
    return ScenarioEnsemble(
        scenarios=tuple(scenarios),
        monthly=monthly,
        master_seed=int(seed_seq.entropy),
        provenance=prov,
    )


def _stage(name: str, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc


def fit_pipeline(series: MonthlySeries, config: PipelineConfig) -> FittedPipeline:
    """Run every fitting stage of the pipeline (no generation).

    First the yearly series is modelled directly; if the chosen model's
    residuals pass the whiteness gate, that model is used as-is and no
    extremes are injected (it already saw the whole series). Otherwise the
    banding branch runs: normal limit, class bands, class frequencies, the
    modified (normal-years-only) series, and a fresh order selection on it.

    Raises
    ------
    PipelineError
        On any stage failure; the error names the stage.
    """
    validation = _stage("validate", validate_series, series)
    if not validation.ok:
        raise PipelineError(
            "validate", "; ".join(msg for _, msg in validation.errors)
        )
    yearly = _stage("aggregate", aggregate_yearly, series)
    factors = _stage("seasonality", compute_seasonality, series, yearly)

    direct: Optional[OrderSelection]
    try:
        direct = select_order(yearly.totals, config.max_p, config.max_q)
    except (FitError, ValueError):
        direct = None  # cannot model the raw series; fall through to banding

    if direct is not None and direct.adequate:
        provenance = Provenance(
            branch="direct",
            seasonality=factors,
            model=direct.model,
            bands=None,
            frequencies=None,
        )
        return FittedPipeline(
            provenance=provenance,
            yearly=yearly,
            validation=validation,
            config=config,
            direct_selection=direct,
        )

    limit = _stage("normal-limit", compute_normal_limit, yearly)
    bands = _stage(
        "bands",
        derive_bands,
        limit,
        yearly,
        wet_split_fraction=config.wet_split_fraction,
    )
    frequencies = _stage("frequencies", compute_frequencies, yearly, bands)
    modified = _stage("modified-series", build_modified_series, yearly, bands)
    modified_selection = _stage(
        "modified-order-selection",
        select_order,
        modified.totals,
        config.max_p,
        config.max_q,
    )
    provenance = Provenance(
        branch="banded",
        seasonality=factors,
        model=modified_selection.model,
        bands=bands,
        frequencies=frequencies,
    )
    return FittedPipeline(
        provenance=provenance,
        yearly=yearly,
        validation=validation,
        config=config,
        direct_selection=direct,
        normal_limit=limit,
        modified=modified,
        modified_selection=modified_selection,
    )


def run_pipeline(
    series: MonthlySeries, config: PipelineConfig
) -> tuple[ScenarioEnsemble, PipelineReport]:
    """Fit the pipeline and generate the configured ensemble."""
    fitted = fit_pipeline(series, config)
    ensemble = _stage(
        "generate",
        generate_ensemble,
        fitted,
        config.n_scenarios,
        config.n_years,
        config.master_seed,
    )
    report = PipelineReport(
        branch=fitted.provenance.branch,
        validation=fitted.validation,
        provenance=fitted.provenance,
        direct_selection=fitted.direct_selection,
        normal_limit=fitted.normal_limit,
        modified_selection=fitted.modified_selection,
        n_removed_years=len(fitted.modified.removed) if fitted.modified else None,
        master_seed=ensemble.master_seed,
        n_scenarios=ensemble.n_scenarios,
        n_years=ensemble.n_years,
        clamp_count=sum(s.n_clamped for s in ensemble.scenarios),
        injection_warnings=tuple(
            w for s in ensemble.scenarios for w in s.warnings
        ),
        config=config,
    )
    return ensemble, report


def ensemble_monthly_csv(ensemble: ScenarioEnsemble) -> str:
    """Monthly output: ``scenario,year,month,precip_mm`` (1-based indices)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "year", "month", "precip_mm"])
    for s_idx in range(ensemble.n_scenarios):
        block = ensemble.monthly[s_idx]
        for y_idx in range(ensemble.n_years):
            for m_idx in range(12):
                writer.writerow(
                    [s_idx + 1, y_idx + 1, m_idx + 1, repr(float(block[y_idx, m_idx]))]
                )
    return buf.getvalue()


def ensemble_yearly_csv(ensemble: ScenarioEnsemble) -> str:
    """Yearly output: ``scenario,year,total_mm,class_injected``.

    ``class_injected`` is empty for base (non-injected) years.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "year", "total_mm", "class_injected"])
    for s_idx, scenario in enumerate(ensemble.scenarios):
        injected_class = {pos: cls.value for pos, cls, _ in scenario.injected}
        for y_idx, total in enumerate(scenario.totals):
            writer.writerow(
                [s_idx + 1, y_idx + 1, repr(float(total)), injected_class.get(y_idx, "")]
            )
    return buf.getvalue()


def read_ensemble_yearly_csv(stream) -> tuple[np.ndarray, list[list[tuple[int, str]]]]:
    """Parse an ensemble yearly CSV back into a (K, L) matrix plus injections.

    Returns the totals matrix and, per scenario, the (position, class value)
    pairs of injected years.
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["scenario", "year", "total_mm", "class_injected"]:
        raise SeriesValidationError(f"bad ensemble yearly header: {header!r}")
    rows = [row for row in reader if row]
    if not rows:
        raise SeriesValidationError("ensemble yearly CSV has no rows")
    n_scenarios = max(int(r[0]) for r in rows)
    n_years = max(int(r[1]) for r in rows)
    if len(rows) != n_scenarios * n_years:
        raise SeriesValidationError("ensemble yearly CSV is not a full grid")
    totals = np.empty((n_scenarios, n_years))
    injections: list[list[tuple[int, str]]] = [[] for _ in range(n_scenarios)]
    for row in rows:
        s_idx, y_idx = int(row[0]) - 1, int(row[1]) - 1
        totals[s_idx, y_idx] = float(row[2])
        if row[3]:
            injections[s_idx].append((y_idx, row[3]))
    return totals, injections
