"""Command-line interface: analyze, generate, and compare subcommands.

Exit status: 0 on success, 1 on any input/validation/usage problem, 2 on an
internal error. All output files are written to a temp file first and moved
into place, so a failing run never leaves partial output.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import click

from ._util import atomic_write_text
from .errors import RaingenError
from .ingest import aggregate_yearly, parse_monthly_csv
from .report import compare, plot_data_csv
from .scenario import (
    PipelineConfig,
    Provenance,
    ScenarioEnsemble,
    YearlyScenario,
    ensemble_monthly_csv,
    ensemble_yearly_csv,
    fit_pipeline,
    read_ensemble_yearly_csv,
    run_pipeline,
)
from .banding import RainfallClass
from .seasonality import factors_to_csv

REPORT_FILE = "pipeline_report.json"
YEARLY_FILE = "ensemble_yearly.csv"
MONTHLY_FILE = "ensemble_monthly.csv"
ANALYSIS_FILE = "analysis.json"
SEASONALITY_FILE = "seasonality.csv"
COMPARISON_FILE = "comparison.json"
PLOT_FILE = "plot_data.csv"

_CONFIG_KEYS = {
    "input",
    "output_dir",
    "seed",
    "scenarios",
    "years",
    "max_p",
    "max_q",
    "year_start_month",
    "wet_split_fraction",
    "deterministic_counts",
    "ensemble_dir",
}


@dataclass(frozen=True)
class CliConfig:
    """Resolved options of one CLI invocation."""

    input: Path
    output_dir: Path
    year_start_month: int = 1
    max_p: int = 3
    max_q: int = 3
    wet_split_fraction: float = 0.5
    deterministic_counts: bool = False
    seed: Optional[int] = None
    scenarios: int = 100
    years: Optional[int] = None

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            max_p=self.max_p,
            max_q=self.max_q,
            wet_split_fraction=self.wet_split_fraction,
            deterministic_counts=self.deterministic_counts,
            n_scenarios=self.scenarios,
            n_years=self.years,
            master_seed=self.seed,
        )


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise RaingenError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise RaingenError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _apply_config_file(ctx: click.Context, params: dict) -> dict:
    """Fill in params the user left at their defaults from the config file."""
    config_path = params.pop("config_path", None)
    if not config_path:
        return params
    file_values = _parse_config_file(config_path)
    for key, raw in file_values.items():
        if key not in params:
            continue  # key belongs to another subcommand
        source = ctx.get_parameter_source(key)
        if source is not None and source.name != "DEFAULT":
            continue  # explicit flag or environment variable wins
        param = next(p for p in ctx.command.params if p.name == key)
        try:
            params[key] = param.type.convert(raw, param, ctx)
        except click.UsageError as exc:
            raise RaingenError(f"config file: bad value for {key}: {exc.message}") from exc
    return params


def _config_option(fn):
    return click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="Optional key = value config file; explicit flags override it.",
    )(fn)


def _model_options(fn):
    for option in reversed(
        [
            click.option(
                "--input",
                "input_path",
                type=click.Path(exists=True, dir_okay=False),
                required=True,
                help="Monthly CSV with header station,year,month,precip_mm.",
            ),
            click.option(
                "--output-dir",
                type=click.Path(file_okay=False),
                default=".",
                show_default=True,
                help="Directory the output files are written to.",
            ),
            click.option(
                "--year-start-month",
                type=click.IntRange(1, 12),
                default=1,
                show_default=True,
                help="Calendar month each 12-month year starts at.",
            ),
            click.option(
                "--max-p",
                type=click.IntRange(min=0),
                default=3,
                show_default=True,
                help="Largest autoregressive order tried.",
            ),
            click.option(
                "--max-q",
                type=click.IntRange(min=0),
                default=3,
                show_default=True,
                help="Largest moving-average order tried.",
            ),
            click.option(
                "--wet-split-fraction",
                type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
                default=0.5,
                show_default=True,
                help="Position of the wet/very-wet boundary between the "
                "normal band and the observed maximum.",
            ),
        ]
    ):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(package_name="raingen")
def cli():
    """Synthesize probabilistic monthly-rainfall scenarios from historical records."""


@cli.command()
@_model_options
@_config_option
@click.pass_context
def analyze(ctx, **params):
    """Report bands, class frequencies, and ARMA order selection for a record."""
    params = _apply_config_file(ctx, params)
    cfg = CliConfig(
        input=Path(params["input_path"]),
        output_dir=Path(params["output_dir"]),
        year_start_month=params["year_start_month"],
        max_p=params["max_p"],
        max_q=params["max_q"],
        wet_split_fraction=params["wet_split_fraction"],
    )
    series = parse_monthly_csv(cfg.input, year_start_month=cfg.year_start_month)
    fitted = fit_pipeline(series, cfg.pipeline_config())
    analysis = {
        "station": series.station_id,
        "n_years": fitted.yearly.n_years,
        "branch": fitted.provenance.branch,
        "validation": fitted.validation.to_dict(),
        "provenance": fitted.provenance.to_dict(),
        "direct_selection": (
            fitted.direct_selection.to_dict() if fitted.direct_selection else None
        ),
        "normal_limit": fitted.normal_limit.to_dict() if fitted.normal_limit else None,
        "modified_selection": (
            fitted.modified_selection.to_dict() if fitted.modified_selection else None
        ),
    }
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(cfg.output_dir / ANALYSIS_FILE, json.dumps(analysis, indent=2) + "\n")
    atomic_write_text(
        cfg.output_dir / SEASONALITY_FILE, factors_to_csv(fitted.provenance.seasonality)
    )
    model = fitted.provenance.model
    click.echo(f"station          {series.station_id}")
    click.echo(f"years            {fitted.yearly.n_years}")
    click.echo(f"branch           {fitted.provenance.branch}")
    click.echo(f"chosen order     ({model.p}, {model.q})")
    if fitted.provenance.bands is not None:
        bands = fitted.provenance.bands
        click.echo(f"normal band      [{bands.normal_lower:.6g}, {bands.normal_upper:.6g}] mm")
        click.echo(f"normal limit     {bands.normal_limit:.6g} mm")
    for warning_code, message in fitted.validation.warnings:
        click.echo(f"warning [{warning_code}]: {message}")
    click.echo(f"wrote {cfg.output_dir / ANALYSIS_FILE}")
    click.echo(f"wrote {cfg.output_dir / SEASONALITY_FILE}")


@cli.command()
@_model_options
@click.option(
    "--seed",
    type=int,
    required=True,
    envvar="RAINGEN_SEED",
    help="Master random seed (reproducibility first: no wall-clock seeding). "
    "Falls back to the RAINGEN_SEED environment variable.",
)
@click.option(
    "--scenarios",
    "-K",
    type=click.IntRange(min=1),
    default=100,
    show_default=True,
    help="Number of scenarios to generate.",
)
@click.option(
    "--years",
    "-L",
    type=click.IntRange(min=1),
    default=None,
    help="Years per scenario [default: the length of the input record].",
)
@click.option(
    "--deterministic-counts",
    is_flag=True,
    default=False,
    show_default=True,
    help="Inject round(frequency * years) extreme years per class instead "
    "of binomial draws.",
)
@_config_option
@click.pass_context
def generate(ctx, **params):
    """Generate a scenario ensemble and write it as CSV plus a JSON report."""
    params = _apply_config_file(ctx, params)
    cfg = CliConfig(
        input=Path(params["input_path"]),
        output_dir=Path(params["output_dir"]),
        year_start_month=params["year_start_month"],
        max_p=params["max_p"],
        max_q=params["max_q"],
        wet_split_fraction=params["wet_split_fraction"],
        deterministic_counts=params["deterministic_counts"],
        seed=params["seed"],
        scenarios=params["scenarios"],
        years=params["years"],
    )
    series = parse_monthly_csv(cfg.input, year_start_month=cfg.year_start_month)
    ensemble, pipeline_report = run_pipeline(series, cfg.pipeline_config())

    monthly_text = ensemble_monthly_csv(ensemble)
    yearly_text = ensemble_yearly_csv(ensemble)
    report_text = json.dumps(pipeline_report.to_dict(), indent=2) + "\n"
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(cfg.output_dir / MONTHLY_FILE, monthly_text)
    atomic_write_text(cfg.output_dir / YEARLY_FILE, yearly_text)
    atomic_write_text(cfg.output_dir / REPORT_FILE, report_text)

    model = ensemble.provenance.model
    click.echo(f"station          {series.station_id}")
    click.echo(f"branch           {ensemble.provenance.branch}")
    click.echo(f"model            ARMA({model.p}, {model.q}), mean {model.mean:.6g} mm")
    click.echo(f"scenarios        {ensemble.n_scenarios} x {ensemble.n_years} years")
    click.echo(f"master seed      {ensemble.master_seed}")
    click.echo(f"clamped years    {pipeline_report.clamp_count}")
    for name in (MONTHLY_FILE, YEARLY_FILE, REPORT_FILE):
        click.echo(f"wrote {cfg.output_dir / name}")


@cli.command("compare")
@click.option(
    "--input",
    "input_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Observed monthly CSV to compare against.",
)
@click.option(
    "--ensemble-dir",
    type=click.Path(exists=True, file_okay=False),
    required=True,
    help="Output directory of a previous `raingen generate` run.",
)
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False),
    default=".",
    show_default=True,
    help="Directory the comparison files are written to.",
)
@click.option(
    "--year-start-month",
    type=click.IntRange(1, 12),
    default=1,
    show_default=True,
    help="Calendar month each 12-month year starts at.",
)
@_config_option
@click.pass_context
def compare_cmd(ctx, **params):
    """Compare an observed record against a previously generated ensemble."""
    params = _apply_config_file(ctx, params)
    input_path = Path(params["input_path"])
    ensemble_dir = Path(params["ensemble_dir"])
    output_dir = Path(params["output_dir"])

    series = parse_monthly_csv(input_path, year_start_month=params["year_start_month"])
    observed = aggregate_yearly(series)
    ensemble = load_ensemble(ensemble_dir)
    result = compare(observed, ensemble)
    plot_text, plot_warnings = plot_data_csv(observed, ensemble)

    output_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(output_dir / COMPARISON_FILE, json.dumps(result.to_dict(), indent=2) + "\n")
    atomic_write_text(output_dir / PLOT_FILE, plot_text)

    click.echo(f"observed mean    {result.observed.mean:.6g} mm")
    click.echo(f"ensemble mean    {result.ensemble.mean:.6g} mm")
    click.echo(f"mean rel diff    {result.mean_rel_diff:.4%}")
    if result.variance_rel_diff is not None:
        click.echo(f"variance rel diff {result.variance_rel_diff:.4%}")
    for message in plot_warnings:
        click.echo(f"warning: {message}")
    click.echo(f"wrote {output_dir / COMPARISON_FILE}")
    click.echo(f"wrote {output_dir / PLOT_FILE}")


def load_ensemble(ensemble_dir: Path) -> ScenarioEnsemble:
    """Rebuild an ensemble from `generate` output files.

    Reads the yearly CSV for the totals and injections and the pipeline
    report for provenance; monthly values are re-derived from the stored
    seasonal fractions.
    """
    report_path = ensemble_dir / REPORT_FILE
    yearly_path = ensemble_dir / YEARLY_FILE
    if not report_path.exists() or not yearly_path.exists():
        raise RaingenError(
            f"{ensemble_dir} does not contain {REPORT_FILE} and {YEARLY_FILE}"
        )
    report_data = json.loads(report_path.read_text(encoding="utf-8"))
    provenance = Provenance.from_dict(report_data["provenance"])
    with open(yearly_path, "r", encoding="utf-8", newline="") as handle:
        totals, injections = read_ensemble_yearly_csv(handle)
    scenarios = []
    for s_idx in range(totals.shape[0]):
        injected = tuple(
            (pos, RainfallClass(name), float(totals[s_idx, pos]))
            for pos, name in injections[s_idx]
        )
        scenarios.append(YearlyScenario(totals[s_idx], injected))
    factors = provenance.seasonality.factors
    monthly = totals[:, :, None] * factors[None, None, :]
    return ScenarioEnsemble(
        scenarios=tuple(scenarios),
        monthly=monthly,
        master_seed=int(report_data["master_seed"]),
        provenance=provenance,
    )


def main(argv=None) -> int:
    """Entry point with the documented exit-status contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help and friends
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (RaingenError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc!r}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
