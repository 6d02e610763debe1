"""Monte-Carlo generation of AR(1) path pairs and the empirical
correlation statistic.

Three innovation families: independent standard Gaussians, Gaussians
correlated at level r (eta = r xi + sqrt(1-r^2) zeta), and independent
second-Wiener-chaos sums xi_i = sum_d sigma_d (S_{i,d}^2 - 1).

Reproducibility contract: replication i of a run seeded s draws from a
Philox4x64 counter-based stream keyed by the 128-bit pair (s, i), so any
execution order or degree of parallelism yields identical values.
Normals come from the inverse CDF applied to 53-bit uniforms on the open
interval (0, 1); unlike rejection samplers this consumes a fixed number
of variates, which keeps substreams aligned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtri

_FAMILIES = ("gaussian_independent", "gaussian_correlated", "second_chaos")
_TWO53 = 1 << 53


class DegenerateSampleError(ValueError):
    """A path had zero empirical variance; the correlation is undefined."""


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n: int
    alpha: float
    beta: float | None = None
    r: float = 0.0
    sigma: tuple[float, ...] = (1.0,)
    tau: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise ValueError("need n >= 2 observations")
        if not abs(self.alpha) < 1.0:
            raise ValueError("alpha must lie in (-1, 1)")
        if self.family == "second_chaos":
            beta = self.alpha if self.beta is None else self.beta
            if not abs(beta) < 1.0:
                raise ValueError("beta must lie in (-1, 1)")
            object.__setattr__(self, "beta", float(beta))
            sig = tuple(float(w) for w in self.sigma)
            tau = tuple(float(w) for w in self.tau)
            if not sig or not tau:
                raise ValueError("chaos weight sequences must be nonempty")
            if not (np.all(np.isfinite(sig)) and np.all(np.isfinite(tau))):
                raise ValueError("chaos weights must be finite")
            object.__setattr__(self, "sigma", sig)
            object.__setattr__(self, "tau", tau)
        else:
            # the Gaussian sections use one common memory parameter
            if self.beta is not None and self.beta != self.alpha:
                raise ValueError("beta is a chaos-family parameter; "
                                 "Gaussian families share alpha")
            object.__setattr__(self, "beta", float(self.alpha))
        if self.family == "gaussian_correlated":
            if not -1.0 <= self.r <= 1.0:
                raise ValueError("correlation r must lie in [-1, 1]")
        elif self.r != 0.0:
            raise ValueError(f"r is not a parameter of {self.family}")


@dataclass(frozen=True)
class PathPair:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("paths must be equal-length vectors")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("paths must be finite")


@dataclass(frozen=True)
class ThetaSampleSet:
    spec: ModelSpec
    seed: int
    scaled: bool
    values: np.ndarray
    redraws: int = 0

    def __post_init__(self):
        if not self.scaled and np.any(np.abs(self.values) > 1.0 + 1e-12):
            raise ValueError("raw correlations must lie in [-1, 1]")


def substream(seed: int, index: int) -> np.random.Generator:
    """The replication-index substream: Philox keyed on (seed, index)."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(index & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # 53-bit uniforms strictly inside (0, 1); ndtri stays finite
    return rng.integers(1, _TWO53, size=size).astype(float) / _TWO53


def _standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    return ndtri(_open_uniform(rng, size))


def _ar_filter(innov: np.ndarray, coef: float) -> np.ndarray:
    # X_k = coef X_{k-1} + xi_k with X_0 = 0
    return lfilter([1.0], [1.0, -coef], innov)


def _innovations(spec: ModelSpec, rng: np.random.Generator):
    n = spec.n
    if spec.family == "gaussian_independent":
        xi = _standard_normals(rng, n)
        eta = _standard_normals(rng, n)
    elif spec.family == "gaussian_correlated":
        xi = _standard_normals(rng, n)
        zeta = _standard_normals(rng, n)
        eta = spec.r * xi + np.sqrt(1.0 - spec.r ** 2) * zeta
    else:
        s = _standard_normals(rng, (n, len(spec.sigma)))
        t = _standard_normals(rng, (n, len(spec.tau)))
        xi = (s * s - 1.0) @ np.asarray(spec.sigma)
        eta = (t * t - 1.0) @ np.asarray(spec.tau)
    return xi, eta


def simulate_pair(spec: ModelSpec, rng: np.random.Generator) -> PathPair:
    """One pair of AR(1) paths of length n under the given family."""
    xi, eta = _innovations(spec, rng)
    return PathPair(_ar_filter(xi, spec.alpha), _ar_filter(eta, spec.beta))


def empirical_stats(p: PathPair):
    """(z11, z12, z22, theta): centered second-moment statistics of the
    pair and their correlation."""
    n = p.x.size
    if n < 2:
        raise ValueError("need at least two observations")
    mx = np.mean(p.x)
    my = np.mean(p.y)
    z11 = np.mean(p.x * p.x) - mx * mx
    z22 = np.mean(p.y * p.y) - my * my
    z12 = np.mean(p.x * p.y) - mx * my
    if z11 <= 0.0 or z22 <= 0.0:
        raise DegenerateSampleError("a path has zero empirical variance")
    theta = z12 / np.sqrt(z11 * z22)
    # Cauchy-Schwarz holds exactly; rounding can leak past 1 by ~1e-16
    theta = min(1.0, max(-1.0, theta))
    return float(z11), float(z12), float(z22), float(theta)


def sample_theta(spec: ModelSpec, reps: int, seed: int,
                 scale: bool = False, threads: int = 1) -> ThetaSampleSet:
    """reps independent draws of theta_n (scale=False) or of the
    family's standardized statistic (scale=True).

    Each replication uses substream(seed, index); a degenerate draw is
    rejected and the same substream simply continues, so results do not
    depend on scheduling.  threads > 1 splits the index range across a
    worker pool; replication i is a pure function of (seed, i), so the
    output is bitwise independent of the thread count.
    """
    if reps < 1:
        raise ValueError("need reps >= 1")
    if threads < 1:
        raise ValueError("need threads >= 1")
    values = np.empty(reps)
    redraw_counts = np.zeros(min(threads, reps), dtype=np.int64)

    def run(worker: int, lo: int, hi: int) -> None:
        for i in range(lo, hi):
            rng = substream(seed, i)
            while True:
                try:
                    _, _, _, theta = empirical_stats(
                        simulate_pair(spec, rng))
                    break
                except DegenerateSampleError:
                    redraw_counts[worker] += 1
            values[i] = theta

    if threads == 1 or reps == 1:
        run(0, 0, reps)
    else:
        from concurrent.futures import ThreadPoolExecutor
        nw = min(threads, reps)
        bounds = np.linspace(0, reps, nw + 1).astype(int)
        with ThreadPoolExecutor(max_workers=nw) as pool:
            futs = [pool.submit(run, w, bounds[w], bounds[w + 1])
                    for w in range(nw)]
            for f in futs:
                f.result()
    redraws = int(redraw_counts.sum())
    if scale:
        from .asymptotics import scaling_constant
        c = scaling_constant(spec.family, spec.alpha, spec.beta, spec.r)
        shift = spec.r if spec.family == "gaussian_correlated" else 0.0
        values = c * np.sqrt(spec.n) * (values - shift)
    return ThetaSampleSet(spec, int(seed), bool(scale), values, redraws)
