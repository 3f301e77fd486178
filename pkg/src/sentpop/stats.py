"""Correlation, significance and regression-error statistics.

Significance tests use the exact Student t distribution. The two-tailed
p-value is evaluated through the regularized incomplete beta function,
computed by a modified-Lentz continued fraction (accurate to ~1e-14, well
inside the 1e-10 budget), so the package has no runtime dependency on a
stats library.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

_CF_EPS = 3e-14
_CF_FPMIN = 1e-300
_CF_MAX_ITER = 300


class Strength(str, enum.Enum):
    ZERO = "Zero"
    WEAK = "Weak"
    MODERATE = "Moderate"
    STRONG = "Strong"
    PERFECT = "Perfect"


@dataclass(frozen=True)
class CorrelationReport:
    n: int
    r: float
    p: float
    strength: Strength


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for it in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * it
        aa = it * (b - it) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x out of range: {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only on one side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t_stat: float, dof: int) -> float:
    """P(|T| >= |t|) for T ~ Student t with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isnan(t_stat):
        raise ValueError("t statistic is NaN")
    if math.isinf(t_stat):
        return 0.0
    x = dof / (dof + t_stat * t_stat)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def _as_series(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Product-moment correlation with a two-tailed significance p-value.

    Requires n >= 3 and non-constant series. The p-value comes from
    t = r sqrt((n-2) / (1-r^2)) against the t distribution with n-2 dof.
    """
    xa, ya = _as_series(x, "x"), _as_series(y, "y")
    if xa.shape[0] != ya.shape[0]:
        raise ValueError("series lengths differ")
    n = xa.shape[0]
    if n < 3:
        raise ValueError("pearson requires at least 3 samples")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    ssx = float(np.dot(dx, dx))
    ssy = float(np.dot(dy, dy))
    if ssx == 0.0 or ssy == 0.0:
        raise ValueError("pearson is undefined for a constant series")
    r = float(np.dot(dx, dy)) / math.sqrt(ssx * ssy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, student_t_two_tailed_p(t_stat, n - 2)


def classify_strength(r: float) -> Strength:
    """Five-way |r| banding with midpoint boundaries 0.05/0.35/0.65/0.95."""
    a = abs(r)
    if a > 1.0:
        raise ValueError(f"|r| must be <= 1, got {r}")
    if a < 0.05:
        return Strength.ZERO
    if a < 0.35:
        return Strength.WEAK
    if a < 0.65:
        return Strength.MODERATE
    if a < 0.95:
        return Strength.STRONG
    return Strength.PERFECT


def correlation_report(x: Sequence[float], y: Sequence[float]) -> CorrelationReport:
    r, p = pearson(x, y)
    return CorrelationReport(n=len(x), r=r, p=p, strength=classify_strength(r))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-tailed paired t-test p-value on the differences a - b.

    Identical differences (zero variance) leave the statistic undefined and
    raise, including the a == b case.
    """
    aa, ba = _as_series(a, "a"), _as_series(b, "b")
    if aa.shape[0] != ba.shape[0]:
        raise ValueError("series lengths differ")
    n = aa.shape[0]
    if n < 2:
        raise ValueError("paired t-test requires at least 2 pairs")
    d = aa - ba
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise ValueError("differences have zero variance; t statistic undefined")
    t_stat = float(np.mean(d)) / (sd / math.sqrt(n))
    return student_t_two_tailed_p(t_stat, n - 1)


def rse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Relative squared error: squared residuals over squared deviation from mean."""
    pa, ya = _as_series(predicted, "predicted"), _as_series(actual, "actual")
    if pa.shape[0] != ya.shape[0]:
        raise ValueError("series lengths differ")
    if ya.shape[0] < 2:
        raise ValueError("rse requires at least 2 samples")
    denom = float(np.sum((ya - ya.mean()) ** 2))
    if denom == 0.0:
        raise ValueError("rse is undefined for constant actuals")
    return float(np.sum((pa - ya) ** 2)) / denom


def r_squared(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Coefficient of determination, 1 - RSE."""
    return 1.0 - rse(predicted, actual)
