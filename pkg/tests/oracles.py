"""Independent reference computations the implementation is checked against.

Everything here deliberately avoids the code paths under test: Yule-Walker
instead of conditional sum of squares, quadrature instead of the chi-square
survival function, a literal sort instead of the percentile routine, and the
closed-form OLS slope instead of polyfit.
"""

import math

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve_toeplitz


def yule_walker_ar(x, p):
    """AR(p) coefficients from the sample autocovariances (biased, 1/n)."""
    x = np.asarray(x, dtype=float)
    z = x - x.mean()
    n = z.size
    gamma = np.array([z[: n - k] @ z[k:] / n for k in range(p + 1)])
    phi = solve_toeplitz(gamma[:p], gamma[1 : p + 1])
    return phi


def chi2_tail_by_quadrature(x, df):
    """P(X > x) for a chi-square by numerical integration of its density."""

    def pdf(t):
        return t ** (df / 2.0 - 1.0) * math.exp(-t / 2.0) / (
            2.0 ** (df / 2.0) * math.gamma(df / 2.0)
        )

    tail, _ = quad(pdf, x, np.inf)
    return tail


def nearest_rank_by_sort(values, pct):
    """Brute-force nearest-rank percentile: sort, count, index."""
    ordered = sorted(float(v) for v in values)
    rank = math.ceil(pct / 100.0 * len(ordered))
    rank = max(rank, 1)
    return ordered[rank - 1]


def ols_slope(ys):
    """Closed-form least-squares slope of ys against 0..n-1."""
    ys = np.asarray(ys, dtype=float)
    xs = np.arange(ys.size, dtype=float)
    xbar, ybar = xs.mean(), ys.mean()
    return float(((xs - xbar) @ (ys - ybar)) / ((xs - xbar) @ (xs - xbar)))


def roots_outside_unit_circle(poly_ascending):
    """True iff all roots of c0 + c1 z + ... + cd z^d lie outside |z| = 1."""
    coeffs = np.trim_zeros(np.asarray(poly_ascending, dtype=float), "b")
    if coeffs.size <= 1:
        return True
    roots = np.roots(coeffs[::-1])
    return bool((np.abs(roots) > 1.0).all())
