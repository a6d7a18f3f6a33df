"""Residual diagnostics: normality test and Student-t interval multipliers.

Self-contained implementations (erf-based normal CDF, continued-fraction
regularized incomplete beta) so the run-time package stays numpy-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample


def normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    critical_value: float
    reject: bool


def ks_gaussian_test(eps: np.ndarray, alpha: float = 0.05) -> KsResult:
    """One-sample Kolmogorov-Smirnov test against Normal(mean(eps), std(eps)).

    Uses the asymptotic two-sided critical value sqrt(-ln(alpha/2)/2)/sqrt(n).
    Location and scale are estimated from the sample itself; the classical
    critical value is then conservative (no Lilliefors correction applied).
    """
    e = np.asarray(eps, dtype=np.float64)
    n = e.size
    if n < 5:
        raise ValueError(f"need at least 5 samples, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    mu = float(np.mean(e))
    sd = float(np.std(e, ddof=1))
    if sd == 0.0 or not math.isfinite(sd):
        raise DegenerateSample("sample standard deviation is zero")

    z = np.sort((e - mu) / sd)
    cdf = np.array([normal_cdf(v) for v in z])
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    stat = float(max(d_plus, d_minus))
    crit = math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n)
    return KsResult(statistic=stat, critical_value=crit, reject=stat > crit)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, dof: int) -> float:
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if t == 0.0:
        return 0.5
    x = dof / (dof + t * t)
    tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def student_t_quantile(prob: float, dof: int) -> float:
    """Inverse Student-t CDF by bisection on the incomplete-beta CDF."""
    if not 0.0 < prob < 1.0:
        raise ValueError("prob must be in (0, 1)")
    if prob == 0.5:
        return 0.0
    if prob < 0.5:
        return -student_t_quantile(1.0 - prob, dof)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, dof) < prob:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, dof) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def confidence_interval(sigma_y: np.ndarray, dof: int, level: float) -> np.ndarray:
    """Half-widths of two-sided confidence intervals: t_mult * sigma_y."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    mult = student_t_quantile((1.0 + level) / 2.0, dof)
    return mult * np.asarray(sigma_y, dtype=np.float64)
