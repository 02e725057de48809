"""ARMA(p, q) modelling of yearly totals.

Estimation is by conditional sum of squares: residuals are computed by the
ARMA recursion with pre-sample values and residuals set to zero, and their
sum of squares is minimized over the coefficient space with a Nelder-Mead
search started from the zero vector. Points whose AR or MA polynomial has a
root on or inside the unit circle are rejected during the search, so every
returned model is stationary and invertible.

Order selection scans a (p, q) grid and picks the minimal AIC, with FPE,
then p+q, then p as tie-breakers; the chosen model's residuals are checked
for whiteness with a Ljung-Box test, which acts as the adequacy gate for
the modelling pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, signal, stats

from .errors import FitError

#: Significance level of the Ljung-Box adequacy gate.
WHITENESS_ALPHA = 0.05

_N_RESTARTS = 5
_JITTER = 0.2


def _reflection_stable(coeffs: Sequence[float]) -> bool:
    """True iff all roots of ``1 - c1 z - ... - cd z^d`` lie outside the unit circle.

    Uses the inverse Levinson recursion: the polynomial is stable exactly
    when every reflection coefficient it unwinds to has magnitude < 1.
    Cheaper than a root solve, which matters inside the optimizer loop.
    """
    a = [float(c) for c in coeffs]
    while a:
        k = a[-1]
        if not abs(k) < 1.0:  # also rejects NaN
            return False
        if len(a) == 1:
            return True
        denom = 1.0 - k * k
        a = [(a[i] + k * a[len(a) - 2 - i]) / denom for i in range(len(a) - 1)]
    return True


def ar_is_stationary(ar_coeffs: Sequence[float]) -> bool:
    """Stationarity of ``x_t = sum_i ar[i] * x_{t-i} + ...``."""
    return _reflection_stable(ar_coeffs)


def ma_is_invertible(ma_coeffs: Sequence[float]) -> bool:
    """Invertibility of ``x_t = e_t + sum_j ma[j] * e_{t-j}``."""
    return _reflection_stable([-c for c in ma_coeffs])


@dataclass(frozen=True)
class ArmaModel:
    """A fitted (or constructed) ARMA(p, q) model of yearly totals."""

    p: int
    q: int
    mean: float
    ar_coeffs: tuple[float, ...]
    ma_coeffs: tuple[float, ...]
    noise_variance: float
    n_fit: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("orders must be >= 0")
        if len(self.ar_coeffs) != self.p or len(self.ma_coeffs) != self.q:
            raise ValueError("coefficient count does not match the order")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be >= 0")

    @property
    def is_stationary(self) -> bool:
        return ar_is_stationary(self.ar_coeffs)

    @property
    def is_invertible(self) -> bool:
        return ma_is_invertible(self.ma_coeffs)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "mean": self.mean,
            "ar_coeffs": list(self.ar_coeffs),
            "ma_coeffs": list(self.ma_coeffs),
            "noise_variance": self.noise_variance,
            "n_fit": self.n_fit,
            "aic": aic_score(self),
            "fpe": fpe_score(self),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArmaModel":
        return cls(
            p=int(data["p"]),
            q=int(data["q"]),
            mean=float(data["mean"]),
            ar_coeffs=tuple(float(c) for c in data["ar_coeffs"]),
            ma_coeffs=tuple(float(c) for c in data["ma_coeffs"]),
            noise_variance=float(data["noise_variance"]),
            n_fit=int(data["n_fit"]),
        )


@dataclass(frozen=True)
class WhitenessResult:
    """Ljung-Box residual test: pass means the residuals look white."""

    statistic: float
    p_value: float
    passed: bool
    lags: int

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "passed": self.passed,
            "lags": self.lags,
        }


@dataclass(frozen=True)
class OrderSelection:
    """Result of the (p, q) grid search."""

    chosen: tuple[int, int]
    scores: dict[tuple[int, int], dict]
    adequate: bool
    model: ArmaModel
    whiteness: Optional[WhitenessResult]

    def to_dict(self) -> dict:
        return {
            "chosen": list(self.chosen),
            "adequate": self.adequate,
            "whiteness": self.whiteness.to_dict() if self.whiteness else None,
            "scores": {
                f"{p},{q}": entry for (p, q), entry in sorted(self.scores.items())
            },
            "model": self.model.to_dict(),
        }


def css_residuals(
    values: np.ndarray, mean: float, ar: Sequence[float], ma: Sequence[float]
) -> np.ndarray:
    """Residuals of the ARMA recursion with zero pre-sample values/residuals."""
    z = np.asarray(values, dtype=float) - mean
    if not len(ar) and not len(ma):
        return z
    ar_poly = np.concatenate(([1.0], -np.asarray(ar, dtype=float)))
    ma_poly = np.concatenate(([1.0], np.asarray(ma, dtype=float)))
    return signal.lfilter(ar_poly, ma_poly, z)


def min_fit_length(p: int, q: int) -> int:
    return max(8, 4 * (p + q + 1))


def fit_arma(series, p: int, q: int) -> ArmaModel:
    """Fit an ARMA(p, q) to a yearly series by conditional sum of squares.

    The series mean is the sample mean; coefficients minimize the sum of
    squared recursion residuals of the demeaned series. The search starts
    from the zero vector and, if the optimizer reports failure, retries
    from up to 5 jittered starts, keeping the best stationary-invertible
    point seen. ``noise_variance`` is SSE / (n - p - q).

    Raises
    ------
    ValueError
        If the series is shorter than ``max(8, 4*(p+q+1))`` or not finite.
    FitError
        If no stationary-invertible point could be found.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < min_fit_length(p, q):
        raise ValueError(
            f"series of length {n} too short for ARMA({p},{q}); "
            f"need >= {min_fit_length(p, q)}"
        )
    if not np.isfinite(x).all():
        raise ValueError("series contains non-finite values")
    mean = float(x.mean())
    z = x - mean

    if p == 0 and q == 0:
        sse = float(z @ z)
        return ArmaModel(0, 0, mean, (), (), sse / n, n)

    def objective(params: np.ndarray) -> float:
        phi = params[:p]
        theta = params[p:]
        if not np.isfinite(params).all():
            return math.inf
        if not ar_is_stationary(phi) or not ma_is_invertible(theta):
            return math.inf
        ar_poly = np.concatenate(([1.0], -phi))
        ma_poly = np.concatenate(([1.0], theta))
        e = signal.lfilter(ar_poly, ma_poly, z)
        return float(e @ e)

    dim = p + q
    best_x: np.ndarray | None = None
    best_sse = math.inf

    def run(start: np.ndarray):
        nonlocal best_x, best_sse
        result = optimize.minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-5, "fatol": 1e-9, "maxfev": 400 * dim},
        )
        if np.isfinite(result.fun) and result.fun < best_sse:
            best_sse = float(result.fun)
            best_x = np.asarray(result.x, dtype=float)
        return result.success

    succeeded = run(np.zeros(dim))
    rng = np.random.default_rng(0)  # fixed: fits are a pure function of their inputs
    attempts = 0
    while not succeeded and attempts < _N_RESTARTS:
        attempts += 1
        start = rng.uniform(-_JITTER, _JITTER, size=dim)
        for _ in range(100):
            if objective(start) < math.inf:
                break
            start = rng.uniform(-_JITTER, _JITTER, size=dim)
        succeeded = run(start)
    if best_x is None or not math.isfinite(best_sse):
        raise FitError(
            f"ARMA({p},{q}) optimization found no stationary-invertible point"
        )
    return ArmaModel(
        p=p,
        q=q,
        mean=mean,
        ar_coeffs=tuple(float(c) for c in best_x[:p]),
        ma_coeffs=tuple(float(c) for c in best_x[p:]),
        noise_variance=best_sse / (n - p - q),
        n_fit=n,
    )


def aic_score(model: ArmaModel) -> float:
    """``n * ln(noise_variance) + 2*(p+q+1)``; -inf marks a degenerate perfect fit."""
    if model.noise_variance == 0.0:
        return -math.inf
    return model.n_fit * math.log(model.noise_variance) + 2.0 * (model.p + model.q + 1)


def fpe_score(model: ArmaModel) -> float:
    """``noise_variance * (n+p+q+1) / (n-p-q-1)``."""
    n = model.n_fit
    return model.noise_variance * (n + model.p + model.q + 1) / (n - model.p - model.q - 1)


def default_whiteness_lags(n: int) -> int:
    return min(10, n // 5)


def residual_whiteness(
    model: ArmaModel, series, lags: Optional[int] = None
) -> WhitenessResult:
    """Ljung-Box test of the model's recursion residuals on ``series``.

    The statistic is ``n(n+2) * sum_k acf_k^2 / (n-k)`` over ``lags``
    autocorrelations of the residuals; the p-value uses a chi-square with
    ``lags - p - q`` degrees of freedom (the fitted coefficients eat that
    many). Pass means p > 0.05.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if lags is None:
        lags = default_whiteness_lags(n)
    if lags < 1:
        raise ValueError(f"series of length {n} is too short for a whiteness test")
    if n - model.p - model.q <= lags:
        raise ValueError(
            f"need n - p - q > lags; got n={n}, p+q={model.p + model.q}, lags={lags}"
        )
    df = lags - model.p - model.q
    if df < 1:
        raise ValueError(f"lags must exceed p+q={model.p + model.q}, got {lags}")

    e = css_residuals(x, model.mean, model.ar_coeffs, model.ma_coeffs)
    e = e - e.mean()
    denom = float(e @ e)
    if denom == 0.0:
        return WhitenessResult(0.0, 1.0, True, lags)
    q_stat = 0.0
    for k in range(1, lags + 1):
        acf_k = float(e[k:] @ e[:-k]) / denom
        q_stat += acf_k * acf_k / (n - k)
    q_stat *= n * (n + 2)
    p_value = float(stats.chi2.sf(q_stat, df))
    return WhitenessResult(q_stat, p_value, p_value > WHITENESS_ALPHA, lags)


def select_order(series, max_p: int = 3, max_q: int = 3) -> OrderSelection:
    """Fit every (p, q) in the grid and return the best model.

    Failed fits are excluded. The winner minimizes (AIC, FPE, p+q, p), a
    fixed value-based ordering, so the outcome does not depend on the order
    the grid is evaluated in. The adequacy flag is the Ljung-Box verdict on
    the winner (False when the series is too short to run the test for the
    winning order).

    Raises
    ------
    FitError
        If every grid fit failed.
    """
    x = np.asarray(series, dtype=float).ravel()
    scores: dict[tuple[int, int], dict] = {}
    fits: dict[tuple[int, int], ArmaModel] = {}
    for p in range(max_p + 1):
        for q in range(max_q + 1):
            try:
                model = fit_arma(x, p, q)
            except (ValueError, FitError) as exc:
                scores[(p, q)] = {"failed": str(exc)}
                continue
            fits[(p, q)] = model
            scores[(p, q)] = {
                "aic": aic_score(model),
                "fpe": fpe_score(model),
                "noise_variance": model.noise_variance,
                "degenerate": model.noise_variance == 0.0,
            }
    if not fits:
        raise FitError("every (p, q) grid fit failed")
    chosen = min(
        fits,
        key=lambda pq: (
            scores[pq]["aic"],
            scores[pq]["fpe"],
            pq[0] + pq[1],
            pq[0],
        ),
    )
    model = fits[chosen]
    try:
        whiteness = residual_whiteness(model, x)
        adequate = whiteness.passed
    except ValueError:
        whiteness = None
        adequate = False
    return OrderSelection(chosen, scores, adequate, model, whiteness)


def simulate(model: ArmaModel, length: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a Gaussian-innovation realization of the model.

    Runs the recursion for ``10*(p+q+1)`` burn-in steps beyond ``length``
    and discards them, so the output is (approximately) a stationary slice
    plus the model mean. Deterministic for a given generator state.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if not model.is_stationary or not model.is_invertible:
        raise ValueError("model must be stationary and invertible to simulate")
    burn_in = 10 * (model.p + model.q + 1)
    innovations = rng.normal(0.0, math.sqrt(model.noise_variance), size=length + burn_in)
    ar_poly = np.concatenate(([1.0], -np.asarray(model.ar_coeffs, dtype=float)))
    ma_poly = np.concatenate(([1.0], np.asarray(model.ma_coeffs, dtype=float)))
    x = signal.lfilter(ma_poly, ar_poly, innovations)
    return model.mean + x[burn_in:]
