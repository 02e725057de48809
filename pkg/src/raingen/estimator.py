"""Scikit-learn style front end for the scenario generator."""

from __future__ import annotations

from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .ingest import MonthlySeries, monthly_series_from_array
from .scenario import (
    FittedPipeline,
    PipelineConfig,
    ScenarioEnsemble,
    fit_pipeline,
    generate_ensemble,
)


class RainfallScenarioGenerator(BaseEstimator):
    """Generate monthly precipitation scenarios from a historical record.

    Fitting estimates the deterministic monthly fractions, tries an ARMA
    model of the yearly totals, and — when the yearly series cannot be
    whitened directly — derives the normal band, the empirical wet/dry class
    frequencies, and an ARMA model of the normal years only. Sampling then
    simulates yearly series, injects extreme years at the historical
    frequencies, and spreads every generated year over the twelve months.

    Parameters
    ----------
    max_p, max_q : int, default=3
        Upper bounds of the ARMA order grid searched during fitting.
    wet_split_fraction : float, default=0.5
        Where the wet/very-wet boundary sits between the top of the normal
        band and the observed maximum (0 < fraction < 1).
    deterministic_counts : bool, default=False
        Inject ``round(frequency * n_years)`` extreme years per class
        instead of drawing the count from a binomial.
    random_state : int or None, default=None
        Master seed for :meth:`sample`. ``None`` samples fresh entropy; the
        seed actually used is recorded on the returned ensemble.

    Attributes
    ----------
    branch_ : str
        ``"direct"`` when the yearly series passed the whiteness gate,
        ``"banded"`` otherwise.
    seasonality_ : ndarray of shape (12,)
        Monthly fractions of the yearly total.
    model_ : ArmaModel
        The ARMA model scenarios are simulated from.
    bands_ : ClassBands or None
        Class edges (``None`` on the direct branch).
    frequencies_ : ClassFrequencies or None
        Empirical class frequencies (``None`` on the direct branch).
    n_years_ : int
        Number of years in the fitted record.

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> monthly = rng.gamma(2.0, 20.0, size=(30, 12))
    >>> gen = RainfallScenarioGenerator(random_state=7).fit(monthly)
    >>> ensemble = gen.sample(n_scenarios=5)
    >>> ensemble.monthly.shape
    (5, 30, 12)
    """

    def __init__(
        self,
        max_p: int = 3,
        max_q: int = 3,
        wet_split_fraction: float = 0.5,
        deterministic_counts: bool = False,
        random_state: Optional[int] = None,
    ):
        self.max_p = max_p
        self.max_q = max_q
        self.wet_split_fraction = wet_split_fraction
        self.deterministic_counts = deterministic_counts
        self.random_state = random_state

    def _pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            max_p=self.max_p,
            max_q=self.max_q,
            wet_split_fraction=self.wet_split_fraction,
            deterministic_counts=self.deterministic_counts,
        )

    def fit(self, X: Union[MonthlySeries, np.ndarray], y=None):
        """Fit the generator on a monthly precipitation record.

        Parameters
        ----------
        X : MonthlySeries, array-like of shape (n_months,) or (n_years, 12)
            The historical record in mm; the flat layout must hold a whole
            number of 12-month years.
        y : ignored
            Present for scikit-learn API compatibility.

        Returns
        -------
        self
        """
        series = X if isinstance(X, MonthlySeries) else monthly_series_from_array(X)
        fitted = fit_pipeline(series, self._pipeline_config())
        self.fitted_pipeline_: FittedPipeline = fitted
        self.branch_ = fitted.provenance.branch
        self.seasonality_ = fitted.provenance.seasonality.factors
        self.model_ = fitted.provenance.model
        self.bands_ = fitted.provenance.bands
        self.frequencies_ = fitted.provenance.frequencies
        self.n_years_ = fitted.yearly.n_years
        return self

    def sample(
        self,
        n_scenarios: int = 100,
        n_years: Optional[int] = None,
        random_state: Optional[int] = None,
    ) -> ScenarioEnsemble:
        """Generate an ensemble of scenarios from the fitted record.

        Parameters
        ----------
        n_scenarios : int, default=100
            Number of scenarios to generate.
        n_years : int or None, default=None
            Years per scenario; ``None`` matches the fitted record.
        random_state : int or None, default=None
            Master seed for this draw; ``None`` falls back to the
            estimator's ``random_state``.

        Returns
        -------
        ScenarioEnsemble
            Scenarios with yearly totals, monthly values of shape
            ``(n_scenarios, n_years, 12)``, provenance, and the seed used.
        """
        if not hasattr(self, "fitted_pipeline_"):
            raise NotFittedError(
                "This RainfallScenarioGenerator instance is not fitted yet; "
                "call fit before sampling"
            )
        seed = self.random_state if random_state is None else random_state
        return generate_ensemble(self.fitted_pipeline_, n_scenarios, n_years, seed)
