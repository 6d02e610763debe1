"""Moment-based density approximation by Legendre projection.

Given the first K raw moments of a bounded random variable and an
interval that carries essentially all of its mass, the density is
approximated by the degree-K Legendre expansion whose coefficients are
the standard projections c_j = (2j+1)/2 * E[P_j(X~)], with X~ the
support-rescaled variable on [-1, 1].  The projection reproduces the
input moments exactly in exact arithmetic; truncation artifacts (small
negative lobes) are left visible rather than clipped, so the represented
moments stay faithful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import Legendre, leggauss, legval


@dataclass(frozen=True)
class DensityApprox:
    support: tuple[float, float]
    coeffs: tuple[float, ...]
    order: int

    def __post_init__(self):
        a, b = self.support
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError("support must be a finite interval with a < b")
        if len(self.coeffs) != self.order + 1:
            raise ValueError("need exactly order + 1 coefficients")
        # total mass is 2 c0 (orthogonality kills every other term); the
        # check is numeric only to catch corrupted coefficient input
        if abs(2.0 * self.coeffs[0] - 1.0) > 1e-6:
            raise ValueError("density does not integrate to 1")


def legendre_from_moments(moments, support=(-5.0, 5.0)) -> DensityApprox:
    """Build the Legendre density approximation from raw moments m0..mK.

    m0 must equal 1; the support should cover effectively all mass (the
    projection cannot see anything outside it).
    """
    m = np.asarray(moments, dtype=float)
    if m.ndim != 1 or m.size < 1:
        raise ValueError("need a one-dimensional moment sequence m0..mK")
    if not np.all(np.isfinite(m)):
        raise ValueError("moments must be finite")
    if abs(m[0] - 1.0) > 1e-12:
        raise ValueError("m0 must be 1 (a probability distribution)")
    a, b = float(support[0]), float(support[1])
    if not a < b:
        raise ValueError("degenerate support (a >= b)")
    order = m.size - 1

    # moments of the rescaled variable X~ = u X + v on [-1, 1]
    u = 2.0 / (b - a)
    v = -(a + b) / (b - a)
    mt = np.empty(order + 1)
    for k in range(order + 1):
        mt[k] = math.fsum(math.comb(k, i) * u ** i * v ** (k - i) * m[i]
                          for i in range(k + 1))

    coeffs = []
    for j in range(order + 1):
        pj = Legendre.basis(j).convert(kind=Polynomial).coef
        ep = math.fsum(pj[k] * mt[k] for k in range(len(pj)))
        coeffs.append((2 * j + 1) / 2.0 * ep)
    return DensityApprox((a, b), tuple(coeffs), order)


def evaluate_density(d: DensityApprox, x):
    """Density value(s) at x; zero outside the support.  Evaluation is
    Clenshaw recurrence on the Legendre series."""
    a, b = d.support
    arr = np.asarray(x, dtype=float)
    scalar_in = arr.ndim == 0
    arr = np.atleast_1d(arr)
    inside = (arr >= a) & (arr <= b)
    t = (2.0 * arr - (a + b)) / (b - a)
    vals = np.where(inside, legval(np.clip(t, -1.0, 1.0), d.coeffs), 0.0)
    vals = vals * (2.0 / (b - a))
    return float(vals[0]) if scalar_in else vals


def reintegrated_moments(d: DensityApprox, upto: int | None = None) -> np.ndarray:
    """Raw moments of the approximation, by Gauss-Legendre quadrature that
    is exact for the polynomial integrand.  Used to verify that the
    projection reproduced its inputs."""
    if upto is None:
        upto = d.order
    a, b = d.support
    deg = d.order + upto
    nodes, weights = leggauss(deg // 2 + 2)
    x = 0.5 * (a + b) + 0.5 * (b - a) * nodes
    fx = evaluate_density(d, x)
    out = np.empty(upto + 1)
    for k in range(upto + 1):
        out[k] = 0.5 * (b - a) * np.sum(weights * x ** k * fx)
    return out


def density_minimum(d: DensityApprox, grid_points: int = 1001) -> float:
    """Most negative value on a uniform support grid; a truncated moment
    expansion can dip below zero and callers may want to report that."""
    a, b = d.support
    x = np.linspace(a, b, grid_points)
    return float(np.min(evaluate_density(d, x)))
