import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from raingen import MonthlySeries, monthly_series_from_array

settings.register_profile(
    "raingen",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("raingen")


def make_monthly(matrix, station="test", start_year=2000, start_month=1) -> MonthlySeries:
    """Build a MonthlySeries from a (n_years, 12) layout."""
    return monthly_series_from_array(
        np.asarray(matrix, dtype=float),
        station_id=station,
        start_year=start_year,
        start_month=start_month,
    )


@pytest.fixture
def gamma_record():
    """A 40-year synthetic record with no extreme years."""
    rng = np.random.default_rng(7)
    return make_monthly(rng.gamma(3.0, 6.0, size=(40, 12)))


@pytest.fixture
def zero_year_record():
    """A 200-year record with every 10th year exactly zero.

    The periodic zeros put a spike at lag 10 of the yearly autocorrelation
    that no ARMA(<=3, <=3) can whiten, forcing the banding branch.
    """
    rng = np.random.default_rng(42)
    matrix = rng.gamma(3.0, 6.0, size=(200, 12))
    matrix[::10, :] = 0.0
    return make_monthly(matrix)
