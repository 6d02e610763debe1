"""Joint moment generating function of the quadratic forms behind the
empirical AR(1) correlation, and exact moments of the scaled statistic.

The MGF evaluated at (s11, s12, s22) is (d_n(rho) d_n(upsilon))^(-1/2)
where rho and upsilon are the two roots determined by the arguments (a
correlation parameter r tilts them).  Moments of the correlation
statistic come from differentiating the MGF m times in s12 at s12 = 0 and
integrating the result against the weight (s11 s22)^(m/2-1) over the open
quadrant; the derivative is extracted exactly with order-m jet
arithmetic.

Two independent routes exist for the second moment: the generic jet
pipeline, and a specialized integral built from the logarithmic
derivative d_n'/d_n.  They are kept separate deliberately so each can
check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import taylor_jet as tj
from .charpoly import d_n, d_n_sign_log, derivative_ratio
from .kernel_spectrum import build_kernel, eigen_sym
from .quadrature import (
    QuadResult,
    integrate_quadrant,
    integrate_triangle_symmetric,
)

_MAX_MOMENT = 10          # table coverage ends here; jets get heavy beyond
_DIAG_GUARD = 1e-12       # below this |s11 - s22|, use the jet limit
_DEF_MAX_NODES = 2_000_000


@dataclass(frozen=True)
class MgfInputs:
    """Arguments of the joint MGF; s12 may be a Jet for differentiation."""
    s11: float
    s12: object = 0.0
    s22: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if self.s11 < 0.0 or self.s22 < 0.0:
            raise ValueError("s11 and s22 must be nonnegative")
        if not -1.0 <= self.r <= 1.0:
            raise ValueError("correlation r must lie in [-1, 1]")
        s12c = self.s12.value if isinstance(self.s12, tj.Jet) else float(self.s12)
        bound = self.s11 * self.s22
        if np.any(np.asarray(s12c) ** 2 > bound + 1e-12 * (1.0 + bound)):
            raise ValueError("need s12^2 <= s11 s22 for a well-defined MGF")


@dataclass(frozen=True)
class MomentResult:
    m: int
    n: int
    alpha: float
    r: float
    value: float
    quad: QuadResult

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("moment value must be finite")


@lru_cache(maxsize=64)
def _eigs(n: int, alpha: float) -> np.ndarray:
    return eigen_sym(build_kernel(n, alpha)).eigenvalues


def rho_upsilon(inp: MgfInputs):
    """The root pair (rho, upsilon) with rho <= upsilon <= 0 at the
    constant-term level.  One formula covers both cases: at r = 0 the
    radicand collapses to (s11 - s22)^2 + 4 s12^2."""
    s11, s12, s22, r = inp.s11, inp.s12, inp.s22, inp.r
    if isinstance(s12, tj.Jet):
        rad = (s11 - s22) ** 2 + 4.0 * ((r * s11 + s12) * (r * s22 + s12))
        const = np.asarray(rad.coeffs[..., 0])
        if np.any(const < 0.0):
            raise ValueError("negative radicand; MGF arguments out of domain")
        root = tj.jet_sqrt(rad)          # needs the constant term > 0
        base = s11 + s22 + 2.0 * r * s12
        return -0.5 * (base + root), -0.5 * (base - root)
    s12 = float(s12)
    rad = (s11 - s22) ** 2 + 4.0 * (r * s11 + s12) * (r * s22 + s12)
    if rad < 0.0:
        raise ValueError("negative radicand; MGF arguments out of domain")
    root = math.sqrt(rad)
    base = s11 + s22 + 2.0 * r * s12
    return -0.5 * (base + root), -0.5 * (base - root)


def phi_n(n: int, alpha: float, inp: MgfInputs):
    """(d_n(rho) d_n(upsilon))^(-1/2), scalar-generic in s12."""
    if isinstance(inp.s12, tj.Jet):
        return _phi_jet(int(n), float(alpha), inp.r,
                        np.asarray(inp.s11, dtype=float),
                        np.asarray(inp.s22, dtype=float), inp.s12)
    rho, ups = rho_upsilon(inp)
    sign, logmag = d_n_sign_log(n, alpha, np.array([rho, ups]))
    if sign[0] <= 0.0 or sign[1] <= 0.0:
        raise ValueError("determinant factor not positive; arguments out of domain")
    return float(np.exp(-0.5 * (logmag[0] + logmag[1])))


def _phi_jet(n: int, alpha: float, r: float, s, t, s12: tj.Jet) -> tj.Jet:
    """phi_n with a jet in the s12 slot, vectorized over batch nodes.

    Goes through the symmetric functions e1 = rho + upsilon and
    e2 = rho * upsilon, which are polynomial in s12, so the radicand's
    square root never enters and the diagonal s == t is harmless:

        d_n(rho) d_n(upsilon) = prod_j (1 - lam_j e1 + lam_j^2 e2).
    """
    lam = _eigs(n, alpha)
    e1 = -(s + t) - 2.0 * r * s12
    e2 = (1.0 - r * r) * (s * t - tj.jet_mul(s12, s12))
    fac = (-np.multiply.outer(lam, e1.coeffs)
           + np.multiply.outer(lam ** 2, e2.coeffs))
    fac = fac.copy()
    fac[..., 0] += 1.0
    # normalize every factor to constant term 1 before multiplying; the raw
    # product of hundreds of factors overflows doubles at tail nodes, while
    # log(c0) sums stay tame.  c0 = (1 - lam rho)(1 - lam ups) >= 1 here.
    c0 = fac[..., 0].copy()
    log_scale = np.sum(np.log(c0), axis=0)
    prod = _product_reduce(tj.Jet(fac / c0[..., None]))
    phi = 1.0 / tj.jet_sqrt(prod)
    return tj.Jet(phi.coeffs * np.exp(-0.5 * log_scale)[..., None])


def _phi_derivative_batch(m: int, n: int, alpha: float, r: float,
                          s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """m-th s12-derivative of phi_n at (s, 0, t), vectorized over nodes."""
    s12 = tj.variable(np.zeros(s.shape), order=m)
    phi = _phi_jet(n, alpha, r, s, t, s12)
    out = tj.extract_derivative(phi, m)
    return np.asarray(out)


def _product_reduce(f: tj.Jet) -> tj.Jet:
    """Product of jets along the leading axis by deterministic pairwise
    halving (log-depth, so 10th-order jets over hundreds of eigenvalues
    stay cheap)."""
    c = f.coeffs
    while c.shape[0] > 1:
        half = c.shape[0] // 2
        prod = tj.jet_mul(tj.Jet(c[:half]), tj.Jet(c[half:2 * half]))
        if c.shape[0] % 2:
            c = np.concatenate([prod.coeffs, c[2 * half:]], axis=0)
        else:
            c = prod.coeffs
    return tj.Jet(c[0])


def moment_integrand(m: int, n: int, alpha: float, r: float = 0.0):
    """The full quadrant integrand whose integral is E[(sqrt(n) theta_n)^m]:
    prefactor, endpoint weight (s11 s22)^(m/2-1), and the jet-extracted
    MGF derivative."""
    pref = (n ** (m / 2.0)) * (-1.0) ** m / (2.0 ** m * math.gamma(m / 2.0) ** 2)
    w = m / 2.0 - 1.0

    def f(s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        deriv = _phi_derivative_batch(m, n, alpha, r, s, t)
        return pref * s ** w * t ** w * deriv

    return f


def moment(m: int, n: int, alpha: float, r: float = 0.0,
           tol_rel: float | None = None, tol_abs: float = 1e-12,
           max_nodes: int = _DEF_MAX_NODES) -> MomentResult:
    """E[(sqrt(n) theta_n)^m] by exact MGF differentiation plus quadrature.

    m = 0 is 1 by definition.  Odd moments vanish identically when r = 0
    because the MGF is even in s12 there; they are returned exactly as 0
    without integrating.  Orders above 10 are rejected.
    """
    m = int(m)
    n = int(n)
    if m < 0:
        raise ValueError("moment order must be nonnegative")
    if m > _MAX_MOMENT:
        raise ValueError(f"moment order capped at {_MAX_MOMENT}")
    if n < 1:
        raise ValueError("need n >= 1")
    if not -1.0 <= r <= 1.0:
        raise ValueError("correlation r must lie in [-1, 1]")
    if m == 0:
        return MomentResult(m, n, alpha, r, 1.0, QuadResult(1.0, 0.0, 0, True))
    if m % 2 == 1 and r == 0.0:
        return MomentResult(m, n, alpha, r, 0.0, QuadResult(0.0, 0.0, 0, True))
    if tol_rel is None:
        tol_rel = 1e-7 if m <= 4 else 1e-5
    quad = integrate_quadrant(moment_integrand(m, n, alpha, r),
                              tol_rel=tol_rel, tol_abs=tol_abs,
                              max_nodes=max_nodes)
    return MomentResult(m, n, alpha, r, quad.value, quad)


def second_moment_integrand(n: int, alpha: float):
    """Integrand of the specialized second-moment formula,

        (n/4) [R(-max) - R(-min)] / (sqrt(d(-max) d(-min)) |s11 - s22|),

    R = d_n'/d_n.  The difference quotient has a finite diagonal limit
    -R'(-s), taken over an order-2 jet when a node comes within 1e-12 of
    the diagonal."""

    def f(s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        hi = np.maximum(s, t)
        lo = np.minimum(s, t)
        gap = hi - lo
        _, log_hi = d_n_sign_log(n, alpha, -hi)
        _, log_lo = d_n_sign_log(n, alpha, -lo)
        amplitude = np.exp(-0.5 * (log_hi + log_lo))
        quot = np.empty(s.size)
        hi_f, lo_f, gap_f = hi.ravel(), lo.ravel(), gap.ravel()
        far = gap_f >= _DIAG_GUARD
        if np.any(far):
            quot[far] = (derivative_ratio(n, alpha, -hi_f[far])
                         - derivative_ratio(n, alpha, -lo_f[far])) / gap_f[far]
        if not np.all(far):
            jet = d_n(n, alpha, tj.variable(-hi_f[~far], order=2))
            c0, c1, c2 = (jet.coeffs[..., k] for k in range(3))
            # limit of the quotient is -d/dlam (d'/d) at -s
            quot[~far] = (c1 / c0) ** 2 - 2.0 * c2 / c0
        return 0.25 * n * quot.reshape(s.shape) * amplitude

    return f


def second_moment_scaled(n: int, alpha: float, tol_rel: float = 1e-7,
                         tol_abs: float = 1e-12,
                         max_nodes: int = _DEF_MAX_NODES) -> MomentResult:
    """E[(sqrt(n) theta_n)^2] through the logarithmic-derivative integral
    over the off-diagonal triangle (doubled).  Independent of the jet
    route; the two must agree within their combined error estimates."""
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2")
    quad = integrate_triangle_symmetric(second_moment_integrand(n, alpha),
                                        tol_rel=tol_rel, tol_abs=tol_abs,
                                        max_nodes=max_nodes)
    return MomentResult(2, n, alpha, 0.0, quad.value, quad)


def limit_second_moment(alpha: float) -> float:
    """n -> infinity second moment of sqrt(n) theta_n: (1+a^2)/(1-a^2)."""
    a = float(alpha)
    if not abs(a) < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    return (1.0 + a * a) / (1.0 - a * a)
