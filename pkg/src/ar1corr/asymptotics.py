"""Normal-approximation diagnostics for the scaled correlation statistic.

Provides the empirical Kolmogorov and Wasserstein-1 distances to the
standard normal law, the per-family standardization constants, a log-log
convergence-rate fit, the fourth-moment constants governing the
second-chaos family, and power tools for the test that rejects
independence when |sqrt(n) theta_n| exceeds a critical value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr, ndtri

from .simulation import ModelSpec, sample_theta

_FAMILIES = ("gaussian_independent", "gaussian_correlated", "second_chaos")


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log n, log distance), together with
    the refined diagnostic distance * sqrt(n / log n) ~ const."""

    ns: tuple[int, ...]
    distances: tuple[float, ...]
    slope: float
    intercept: float
    residual: float
    scaled_const: tuple[float, ...]
    scaled_residual: float

    def __post_init__(self):
        if not (len(self.ns) == len(self.distances) == len(self.scaled_const)):
            raise ValueError("ns, distances and scaled_const must align")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("ns must be strictly increasing")
        if any(not (d > 0 and np.isfinite(d)) for d in self.distances):
            raise ValueError("distances must be positive and finite")
        if not all(np.isfinite(v) for v in
                   (self.slope, self.intercept, self.residual,
                    self.scaled_residual)):
            raise ValueError("fit produced non-finite coefficients")


@dataclass(frozen=True)
class ChaosConstants:
    """Limit variance and bound constants for the second-chaos family."""

    m3: float
    m4: float
    m5: float
    c25: float
    c26: float

    def __post_init__(self):
        vals = (self.m3, self.m4, self.m5, self.c25, self.c26)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("constants must be finite")
        if self.m3 <= 0 or self.m4 <= 0 or self.m5 <= 0 or self.c26 <= 0:
            raise ValueError("variance constants must be positive")
        if self.c25 < 0:
            raise ValueError("c25 cannot be negative")

    def second_moment_bound(self, n: int) -> float:
        """Bound (4 c25 + 12 c26) / n on the deviation of the second
        moment of sqrt(n) Z12 from its limit 4 m3."""
        if n < 1:
            raise ValueError("need n >= 1")
        return (4.0 * self.c25 + 12.0 * self.c26) / n


def _checked_sample(sample) -> np.ndarray:
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("sample must be a nonempty vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample must be finite")
    return np.sort(arr)


def kolmogorov_distance(sample) -> float:
    """sup-distance between the empirical CDF and the standard normal."""
    xs = _checked_sample(sample)
    n = xs.size
    cdf = ndtr(xs)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def wasserstein1_distance(sample) -> float:
    """L1 distance between empirical and standard-normal quantiles."""
    xs = _checked_sample(sample)
    n = xs.size
    q = ndtri((np.arange(1, n + 1) - 0.5) / n)
    return float(np.mean(np.abs(xs - q)))


def scaling_constant(family: str, alpha: float, beta: float | None = None,
                     r: float = 0.0) -> float:
    """Constant c with c * sqrt(n) * (theta_n - shift) asymptotically
    standard normal; shift is r for the correlated family, else 0."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if not abs(alpha) < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    if family == "second_chaos":
        b = alpha if beta is None else beta
        if not abs(b) < 1.0:
            raise ValueError("beta must lie in (-1, 1)")
        return math.sqrt((1.0 - alpha * b) / (1.0 + alpha * b))
    base = math.sqrt((1.0 - alpha ** 2) / (1.0 + alpha ** 2))
    if family == "gaussian_correlated":
        if not abs(r) < 1.0:
            raise ValueError("correlated-family scaling needs |r| < 1")
        return base / (1.0 - r ** 2)
    return base


_DISTANCES = {
    "kolmogorov": kolmogorov_distance,
    "wasserstein1": wasserstein1_distance,
}


def fit_loglog(ns, distances) -> RateFit:
    """Fit log(distance) = slope * log(n) + intercept on given points.

    Also evaluates each distance * sqrt(n / log n); the spread of those
    values in log space (scaled_residual) measures how close the decay
    is to sqrt(log n / n).
    """
    ns = tuple(int(n) for n in ns)
    ds = tuple(float(d) for d in distances)
    if len(ns) != len(ds):
        raise ValueError("ns and distances must align")
    if len(ns) < 3:
        raise ValueError("need at least three sizes to fit a rate")
    if any(n < 2 for n in ns):
        raise ValueError("sizes must be at least 2")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be strictly increasing")
    if any(not (d > 0 and np.isfinite(d)) for d in ds):
        raise ValueError("distances must be positive and finite")
    narr = np.asarray(ns, dtype=float)
    lx = np.log(narr)
    ly = np.log(np.asarray(ds))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = np.max(np.abs(ly - (slope * lx + intercept)))
    consts = np.asarray(ds) * np.sqrt(narr / np.log(narr))
    lc = np.log(consts)
    return RateFit(ns, ds, float(slope), float(intercept), float(resid),
                   tuple(float(c) for c in consts),
                   float(np.max(np.abs(lc - np.mean(lc)))))


def rate_fit(spec: ModelSpec, ns, reps: int, seed: int,
             distance: str = "kolmogorov", threads: int = 1) -> RateFit:
    """Decay rate of the chosen distance to N(0,1) for the scaled
    statistic of the model template, measured across sample sizes.

    The template's n is replaced by each entry of ns in turn; per-size
    streams are keyed by seed + n, so single sizes can be reproduced
    in isolation.  Needs at least four strictly increasing sizes.
    """
    try:
        metric = _DISTANCES[distance]
    except KeyError:
        raise ValueError(f"unknown distance {distance!r}") from None
    ns = tuple(int(n) for n in ns)
    if len(ns) < 4:
        raise ValueError("need at least four sizes to fit a rate")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be strictly increasing")
    ds = []
    for n in ns:
        out = sample_theta(replace(spec, n=n), int(reps), seed + n,
                           scale=True, threads=threads)
        ds.append(metric(out.values))
    return fit_loglog(ns, ds)


def chaos_constants(alpha: float, beta: float, sigma, tau) -> ChaosConstants:
    """Limit constants for second-chaos innovations with weights sigma
    (X side) and tau (Y side)."""
    if not (abs(alpha) < 1.0 and abs(beta) < 1.0):
        raise ValueError("memory parameters must lie in (-1, 1)")
    sig = np.asarray(tuple(sigma), dtype=float)
    tav = np.asarray(tuple(tau), dtype=float)
    if sig.size == 0 or tav.size == 0:
        raise ValueError("weight sequences must be nonempty")
    if not (np.all(np.isfinite(sig)) and np.all(np.isfinite(tav))):
        raise ValueError("weights must be finite")
    s2 = float(np.sum(sig ** 2))
    s4 = float(np.sum(sig ** 4))
    t2 = float(np.sum(tav ** 2))
    t4 = float(np.sum(tav ** 4))
    ab = alpha * beta
    a2 = alpha ** 2
    b2 = beta ** 2
    st = s2 * t2
    m3 = (1.0 + ab) / ((1.0 - ab) * (1.0 - a2) * (1.0 - b2)) * st
    c25 = ((a2 + b2 - 2.0 * a2 * b2) / ((1.0 - a2) ** 2 * (1.0 - b2) ** 2)
           * st
           + 2.0 * abs(ab) / ((1.0 - ab) * (1.0 - a2) * (1.0 - b2))
           * (a2 / (1.0 - a2) + b2 / (1.0 - b2) + 1.0 / (1.0 - abs(ab)))
           * st)
    c26 = ((2.0 + 2.0 * abs(alpha)) * (2.0 + 2.0 * abs(beta))
           / ((1.0 - alpha) * (1.0 - a2) * (1.0 - beta) * (1.0 - b2)) * st)
    m4 = 36.0 / (1.0 - a2) ** 2 * s4 + 4.0 * (1.0 + a2) / (1.0 - a2) ** 3 * s2 ** 2
    m5 = 36.0 / (1.0 - b2) ** 2 * t4 + 4.0 * (1.0 + b2) / (1.0 - b2) ** 3 * t2 ** 2
    return ChaosConstants(m3, m4, m5, c25, c26)


def power_lower_bound(n: int, alpha: float, r: float, c_a: float,
                      c13: float = 0.0) -> float:
    """Theoretical lower bound, clamped to [0, 1], on the power of the
    test rejecting when |sqrt(n) theta_n| > c_a against correlation r.

    c13 is the constant in the O(sqrt(log n / n)) normal-approximation
    penalty; 0 drops the penalty term.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not abs(alpha) < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    if not abs(r) < 1.0:
        raise ValueError("need |r| < 1")
    if c_a <= 0 or c13 < 0:
        raise ValueError("c_a must be positive and c13 nonnegative")
    kappa = scaling_constant("gaussian_correlated", alpha, r=r)
    root = math.sqrt(n)
    val = (ndtr(-kappa * (c_a - root * r)) + ndtr(-kappa * (c_a + root * r))
           - 2.0 * c13 * math.sqrt(math.log(n) / n))
    return float(min(1.0, max(0.0, val)))


def mc_power(n: int, alpha: float, r: float, c_a: float, reps: int,
             seed: int, threads: int = 1) -> float:
    """Monte-Carlo rejection frequency of |sqrt(n) theta_n| > c_a under
    correlation r (r = 0 gives the empirical size)."""
    if c_a <= 0:
        raise ValueError("c_a must be positive")
    spec = ModelSpec("gaussian_correlated", n, alpha, r=r)
    out = sample_theta(spec, reps, seed, threads=threads)
    return float(np.mean(np.sqrt(n) * np.abs(out.values) > c_a))
