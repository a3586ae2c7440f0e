"""
Mergeable streaming statistics, the one-sample Kolmogorov-Smirnov test and
pass/fail verdicts.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erf

from src.utils.errors import WignerSpikesError

logger = logging.getLogger(__name__)

KS_MIN_SAMPLE = 20


class SummaryStats:
    """Running count, mean, central moments M2..M4, min and max.

    Updates follow Welford's recurrences extended to the fourth moment;
    ``merge`` uses the pairwise (Chan et al.) combination so partial results
    from different workers can be folded together.
    """

    def __init__(self) -> None:
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.m3 = 0.0
        self.m4 = 0.0
        self.min = math.inf
        self.max = -math.inf

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "SummaryStats":
        stats = cls()
        for value in values:
            stats.push(value)
        return stats

    def push(self, x: float) -> None:
        """Add a sample"""
        x = float(x)
        self.min = min(self.min, x)
        self.max = max(self.max, x)
        n1 = self.count
        self.count += 1
        n = self.count
        delta = x - self.mean
        delta_n = delta / n
        delta_n2 = delta_n * delta_n
        term1 = delta * delta_n * n1
        self.mean += delta_n
        self.m4 += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * self.m2 - 4 * delta_n * self.m3
        self.m3 += term1 * delta_n * (n - 2) - 3 * delta_n * self.m2
        self.m2 += term1

    def merge(self, other: "SummaryStats") -> "SummaryStats":
        """Combined statistics of both sample sets (neither input is modified)"""
        merged = SummaryStats()
        if self.count == 0:
            merged.__dict__.update(other.__dict__)
            return merged
        if other.count == 0:
            merged.__dict__.update(self.__dict__)
            return merged
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        delta2 = delta * delta
        merged.count = n
        merged.mean = (na * self.mean + nb * other.mean) / n
        merged.m2 = self.m2 + other.m2 + delta2 * na * nb / n
        merged.m3 = (self.m3 + other.m3 + delta * delta2 * na * nb * (na - nb) / (n * n)
                     + 3.0 * delta * (na * other.m2 - nb * self.m2) / n)
        merged.m4 = (self.m4 + other.m4
                     + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n ** 3)
                     + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
                     + 4.0 * delta * (na * other.m3 - nb * self.m3) / n)
        merged.min = min(self.min, other.min)
        merged.max = max(self.max, other.max)
        return merged

    __add__ = merge

    def centred_scaled(self, factor: float) -> "SummaryStats":
        """Statistics of factor * (x - mean), derived from the stored moments"""
        scaled = SummaryStats()
        scaled.count = self.count
        scaled.m2 = self.m2 * factor ** 2
        scaled.m3 = self.m3 * factor ** 3
        scaled.m4 = self.m4 * factor ** 4
        if self.count:
            scaled.min = (self.min - self.mean) * factor
            scaled.max = (self.max - self.mean) * factor
        return scaled

    @property
    def variance(self) -> float:
        """Unbiased sample variance"""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def std_error(self) -> float:
        """Standard error of the mean"""
        return self.std / math.sqrt(self.count) if self.count > 1 else math.inf

    @property
    def variance_std_error(self) -> float:
        """Standard error of the sample variance from the fourth central moment"""
        if self.count < 4:
            return math.inf
        n = self.count
        central4 = self.m4 / n
        central2 = self.m2 / n
        return math.sqrt(max(central4 - central2 * central2 * (n - 3) / (n - 1), 0.0) / n)

    def to_dict(self, name: str) -> Dict[str, Any]:
        return {
            "name": name,
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "std_error": self.std_error if self.count > 1 else None,
            "variance_std_error": self.variance_std_error if self.count > 3 else None,
            "min": self.min if self.count else None,
            "max": self.max if self.count else None,
        }


def normal_cdf(x: np.ndarray, mean: float = 0.0, variance: float = 1.0) -> np.ndarray:
    """Normal CDF through the error function"""
    return 0.5 * (1.0 + erf((np.asarray(x) - mean) / math.sqrt(2.0 * variance)))


def kolmogorov_survival(y: float, tolerance: float = 1e-12) -> float:
    """P(K > y) for the Kolmogorov distribution, alternating series"""
    if y < 1.1e-16:
        return 1.0
    x = -2.0 * y * y
    sign = 1.0
    p = 0.0
    r = 1.0
    while True:
        t = math.exp(x * r * r)
        p += sign * t
        if t == 0.0 or t <= tolerance * abs(p):
            break
        r += 1.0
        sign = -sign
    return min(max(2.0 * p, 0.0), 1.0)


def ks_statistic(sample: Sequence[float], mean: float, variance: float) -> Tuple[float, float]:
    """One-sample KS test of ``sample`` against N(mean, variance).

    Returns:
        (D, p) with p = P(K > sqrt(n) D) from the asymptotic Kolmogorov
        distribution
    """
    if not variance > 0:
        raise WignerSpikesError("invalid-target", f"target variance must be positive, got {variance}")
    data = np.sort(np.asarray(sample, dtype=np.float64))
    n = data.shape[0]
    if n < KS_MIN_SAMPLE:
        raise WignerSpikesError("invalid-target", f"KS test needs at least {KS_MIN_SAMPLE} points, got {n}")
    cdf = normal_cdf(data, mean, variance)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    d = float(max(upper.max(), lower.max()))
    return d, kolmogorov_survival(math.sqrt(n) * d)


@dataclass
class Verdict:
    """One pass/fail check with everything needed to recompute it.

    Rules:
        abs-or-se: |empirical - target| <= max(se_multiplier * standard_error, tolerance)
        p-above: empirical (a p-value) > target
        at-most: empirical <= target
        strictly-decreasing: the list ``values`` is strictly decreasing
    """

    name: str
    rule: str
    empirical: Any
    target: Any
    tolerance: float = 0.0
    standard_error: Optional[float] = None
    se_multiplier: float = 3.0
    values: List[float] = field(default_factory=list)
    passed: bool = field(init=False, default=False)

    def __post_init__(self):
        self.passed = self.evaluate()

    def evaluate(self) -> bool:
        if self.rule == "abs-or-se":
            se = self.standard_error if self.standard_error is not None and math.isfinite(self.standard_error) else 0.0
            return abs(self.empirical - self.target) <= max(self.se_multiplier * se, self.tolerance)
        if self.rule == "p-above":
            return self.empirical > self.target
        if self.rule == "at-most":
            return self.empirical <= self.target
        if self.rule == "strictly-decreasing":
            return len(self.values) > 1 and all(a > b for a, b in zip(self.values, self.values[1:]))
        raise WignerSpikesError("invalid-parameter", f"unknown verdict rule '{self.rule}'")

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "rule": self.rule,
            "empirical": self.empirical,
            "target": self.target,
            "tolerance": self.tolerance,
            "standard_error": self.standard_error,
            "se_multiplier": self.se_multiplier,
            "passed": self.passed,
        }
        if self.values:
            data["values"] = list(self.values)
        return data


def mean_verdict(name: str, stats: SummaryStats, target: float, tolerance: float,
                 extra_se: float = 0.0) -> Verdict:
    """|mean - target| <= max(3 SE, tolerance); ``extra_se`` adds target uncertainty"""
    se = math.sqrt(stats.std_error ** 2 + extra_se ** 2) if stats.count > 1 else None
    return Verdict(name=name, rule="abs-or-se", empirical=stats.mean, target=target,
                   tolerance=tolerance, standard_error=se)


def variance_verdict(name: str, stats: SummaryStats, target: float, relative: float,
                     floor: float = 1e-12) -> Verdict:
    """|variance - target| <= relative * |target| (no SE allowance)"""
    return Verdict(name=name, rule="abs-or-se", empirical=stats.variance, target=target,
                   tolerance=max(relative * abs(target), floor),
                   standard_error=stats.variance_std_error if stats.count > 3 else None,
                   se_multiplier=0.0)
