"""Kernel matrix of the demeaned AR(1) quadratic form and its spectrum.

The empirical variance of a demeaned AR(1) path is a quadratic form in the
innovations, Z11 = Xi' K_n Xi, with an explicit n x n symmetric kernel K_n.
This module builds K_n, diagonalizes it with a cyclic Jacobi sweep, and
exposes the closed-form spectral identities (trace, squared trace, quartic
bound, positive-eigenvalue product) plus the rate constants C1..C6 that the
normal-approximation bounds are made of.

Everything here is a pure function of (n, alpha); nothing is mutated after
construction, so concurrent use is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import signal

# ----------------------------
# kernel construction
# ----------------------------

@dataclass(frozen=True, eq=False)
class KernelMatrix:
    n: int
    alpha: float
    entries: np.ndarray


def build_kernel(n: int, alpha: float) -> KernelMatrix:
    """Kernel entry (j,k), 1-indexed:

        (1/n) (a^|k-j| - a^{k+j}) / (1-a^2)  -  (1/n^2) (1-a^k)(1-a^j) / (1-a)^2

    Positive semi-definite of rank n-1 (the demeaning direction is the null
    space); n = 1 degenerates to [[0]].
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    alpha = float(alpha)
    if not abs(alpha) < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    idx = np.arange(1, n + 1)
    absdiff = np.abs(idx[:, None] - idx[None, :])
    pairsum = idx[:, None] + idx[None, :]
    station = (alpha**absdiff - alpha**pairsum) / (1.0 - alpha**2) / n
    g = (1.0 - alpha**idx) / (1.0 - alpha)
    demean = np.outer(g, g) / n**2
    entries = station - demean
    entries.flags.writeable = False
    return KernelMatrix(n=n, alpha=alpha, entries=entries)


# ----------------------------
# cyclic Jacobi eigensolver
# ----------------------------

_MAX_SWEEPS = 30


def _jacobi(a: np.ndarray):
    """Cyclic Jacobi with threshold sweeps on a symmetric matrix.

    Returns (eigenvalues, eigenvector matrix V with K V = V diag).  Chosen
    over LAPACK because rotations preserve high relative accuracy in the
    tiny eigenvalues near the kernel's null direction.
    """
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n)
    if n == 1:
        return np.array([a[0, 0]]), v
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return np.zeros(n), v
    for sweep in range(_MAX_SWEEPS):
        lower = np.tril(a, -1)
        off = np.sum(np.abs(lower))
        # n * max-offdiag bounds the eigenvalue perturbation; 5e-14 leaves
        # a wide margin under the 1e-10 reconstruction contract
        if off == 0.0 or np.max(np.abs(lower)) <= 5e-14 * scale:
            return np.diag(a).copy(), v
        # first sweeps rotate only above a threshold, later sweeps always
        thresh = 0.2 * off / (n * n) if sweep < 3 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = 100.0 * abs(apq)
                # past the early sweeps, annihilate negligible entries outright
                if sweep > 3 and abs(a[p, p]) + g == abs(a[p, p]) \
                        and abs(a[q, q]) + g == abs(a[q, q]):
                    a[p, q] = a[q, p] = 0.0
                    continue
                if abs(apq) <= thresh:
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise RuntimeError(
        f"jacobi eigensolver failed to converge within {_MAX_SWEEPS} sweeps")


@dataclass(frozen=True, eq=False)
class SpectrumSummary:
    eigenvalues: np.ndarray          # descending
    power_sums: tuple                # (sum l, sum l^2, sum l^4)
    positive_product: float          # prod of the n-1 leading eigenvalues
    log_positive_product: float      # same, in log domain (underflow-safe)


def eigen_sym(kernel: KernelMatrix) -> SpectrumSummary:
    """Full spectrum of the kernel, with a reconstruction guarantee.

    Raises if the Jacobi iteration fails to reproduce the matrix to
    1e-10 * max|K| when reassembled from eigenpairs.
    """
    lam, v = _jacobi(kernel.entries)
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    v = v[:, order]
    scale = max(np.max(np.abs(kernel.entries)), 1e-300)
    recon = (v * lam) @ v.T
    err = np.max(np.abs(recon - kernel.entries))
    if err > 1e-10 * scale:
        raise RuntimeError(
            f"eigendecomposition reconstruction error {err:.3e} exceeds "
            f"1e-10 * {scale:.3e}")
    lead = lam[:-1]  # all but the (near-)zero eigenvalue of the null direction
    if lead.size and np.all(lead > 0.0):
        logprod = float(np.sum(np.log(lead)))
        prod = float(np.exp(logprod)) if logprod > -700 else 0.0
    else:
        prod = float(np.prod(lead)) if lead.size else 1.0
        logprod = math.log(prod) if prod > 0 else -math.inf
    sums = (float(np.sum(lam)), float(np.sum(lam**2)), float(np.sum(lam**4)))
    return SpectrumSummary(
        eigenvalues=lam, power_sums=sums,
        positive_product=prod, log_positive_product=logprod)


# ----------------------------
# closed-form spectral identities
# ----------------------------

def trace_identity(n: int, alpha: float):
    """Exact trace:  sum of eigenvalues = 1/(1-a^2) + kappa1(n)/n."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    a = float(alpha)
    kappa1 = (
        -(a**2 * (1.0 - a**(2 * n)) + (1.0 + a) ** 2) / (1.0 - a**2) ** 2
        + (2.0 * a * (1.0 + a) * (1.0 - a**n) - a**2 * (1.0 - a**(2 * n)))
        / (n * (1.0 - a) ** 2 * (1.0 - a**2))
    )
    sum_lambda = 1.0 / (1.0 - a**2) + kappa1 / n
    return sum_lambda, kappa1


def squared_sum_identity(n: int, alpha: float):
    """Exact squared trace:  sum l^2 = (1+a^2)/(n(1-a^2)^3) + kappa2(n)/n^2.

    kappa2 is assembled term by term (never by subtracting two large
    traces), with the two double sums reduced to O(n):
      * the demeaning-squared sum is separable,
      * the cross sum uses the running recurrence T_{k+1} = a (T_k + v_k)
        for T_k = sum_{j<k} a^{k-j} v_j, evaluated as an IIR filter.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    a = float(alpha)
    k = np.arange(1, n + 1)
    ak = a**k
    v = 1.0 - ak
    T = signal.lfilter([0.0, a], [1.0, -a], v)
    cross_station = float(np.dot(v, v) + 2.0 * np.dot(v, T))   # a^|k-j| part
    cross_pair = float(np.dot(ak, v)) ** 2                     # a^{k+j} part
    s_cross = cross_station - cross_pair
    s_quad = float(np.dot(v, v)) ** 2
    kappa2 = (
        4.0 * n * a**(2 * n + 2) / (1.0 - a**2) ** 3
        - (4.0 * a**2 + a**4 - 4.0 * a**(2 * n + 2) - a**(4 * n + 4))
        / (1.0 - a**2) ** 4
        - (2.0 / n) * s_cross / ((1.0 - a) ** 2 * (1.0 - a**2))
        + (1.0 / n**2) * s_quad / (1.0 - a) ** 4
    )
    sum_sq = (1.0 + a**2) / (n * (1.0 - a**2) ** 3) + kappa2 / n**2
    return sum_sq, kappa2


def quartic_sum_bound(n: int, alpha: float):
    """Numeric sum of fourth powers of the eigenvalues and its bound C3/n^3."""
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2")
    spectrum = eigen_sym(build_kernel(n, alpha))
    s4 = spectrum.power_sums[2]
    bound = rate_constants(alpha).C3 / n**3
    if s4 > bound:
        raise RuntimeError(
            f"quartic eigenvalue sum {s4:.6e} violates bound {bound:.6e}")
    return s4, bound


class ClosedProduct(NamedTuple):
    product: float        # may underflow to 0.0 for n beyond ~130
    log_product: float
    geometric_mean_stat: float  # (n-1) * product^(1/(n-1)), always >= 1/4


def closed_product(n: int, alpha: float) -> ClosedProduct:
    """Closed form for the product of the n-1 positive eigenvalues:

        n^{-(n-1)} * (1 + a^2 (n-1)/n - 2 a (n-1)/n)
    """
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2")
    a = float(alpha)
    factor = 1.0 + (a * a - 2.0 * a) * (n - 1) / n
    log_product = -(n - 1) * math.log(n) + math.log(factor)
    product = math.exp(log_product) if log_product > -700 else 0.0
    geo = (n - 1) * math.exp(log_product / (n - 1))
    if geo < 0.25:
        raise RuntimeError(
            f"geometric-mean statistic {geo:.6f} fell below 1/4 (n={n}, alpha={a})")
    return ClosedProduct(product, log_product, geo)


# ----------------------------
# rate constants
# ----------------------------

class RateConstants(NamedTuple):
    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    C6: float


def _sup_n_alpha_power(a: float) -> float:
    """sup over positive integers n of n * a^(2n+2)  (a in (-1,1))."""
    if a == 0.0:
        return 0.0
    aa = abs(a)
    nstar = -1.0 / (2.0 * math.log(aa))
    cands = {1, max(1, math.floor(nstar)), max(1, math.ceil(nstar))}
    return max(c * aa ** (2 * c + 2) for c in cands)


def rate_constants(alpha: float) -> RateConstants:
    """The six explicit constants of the spectral and normal-approximation
    bounds, evaluated verbatim from their defining formulas."""
    a = float(alpha)
    if not abs(a) < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    one_m2 = 1.0 - a * a
    C1 = (a**2 + (1.0 + a) ** 2) / one_m2**2 \
        + (4.0 * abs(a) + 5.0 * a**2) / ((1.0 - a) ** 2 * one_m2)
    C2 = (
        4.0 / one_m2**3 * _sup_n_alpha_power(a)
        + (4.0 * a**2 + a**4) / one_m2**4
        + 8.0 / ((1.0 - a) ** 2 * one_m2)
        + 16.0 * abs(a) / ((1.0 - abs(a)) * (1.0 - a) ** 2 * one_m2)
        + 16.0 / (1.0 - a) ** 4
    )
    C3 = (
        2.0 ** (4.0 / 3.0) / (one_m2 ** (4.0 / 3.0) * (1.0 - abs(a) ** (4.0 / 3.0)))
        + 16.0 / (1.0 - a) ** (8.0 / 3.0)
    ) ** 3
    C4 = one_m2**3 / (1.0 + a**2) * math.sqrt(C2**2 + C3)
    C5 = 81.0 * ((1.0 + a**2) / one_m2**3 + C2 / 10.0) ** 2
    b = 2.0 * math.sqrt(2.0 / math.pi) + 1.0
    C6 = (
        (4.0 * b**4 * math.sqrt(one_m2 / (1.0 + a**2))
         + 2.0 * b**2 * one_m2 / math.sqrt(1.0 + a**2))
        * C5**0.25
        * math.sqrt(
            2.0 * (1.0 + a**2) / one_m2
            + one_m2**2 * C1**2 / 10.0
            + one_m2**2 * C2 / 5.0)
    )
    return RateConstants(C1, C2, C3, C4, C5, C6)
