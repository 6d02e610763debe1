"""Characteristic-polynomial machinery for the AR(1) kernel.

d_n(lambda) = det(I_n - lambda K_n) admits a ten-term closed form built out
of the two roots gamma1, gamma2 of the quadratic y^2 - (1-z+a^2) y + a^2
(z = lambda/n) and their discriminant Delta(z).  Its derivative d_n' has a
longer explicit display in the helper functions p_m, r_m, l1, l2.  This
module evaluates both field-generically:

  * plain real arguments travel a vectorized (sign, log-magnitude) path,
    because gamma1^(n+1) overflows long before the quantities of interest
    do (Table-style workloads need n up to ~1e6 in the asymptotic checks);
  * jet arguments run the same algebra through taylor_jet, giving exact
    high-order lambda-derivatives.

Near the branch point Delta(z) = 0 and near the removable pole
q = n(1-a)^2 - lambda the closed form degenerates; both paths then fall
back to the branch-free three-term recurrence for p_m plus a rank-one
determinant expansion, assembled in O(n).

Everything is pure and reentrant.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import taylor_jet as tj
from .taylor_jet import Jet

_BRANCH_GUARD = 1e-8   # on Delta(z), scaled by (1 + |z|)^2
_POLE_GUARD = 1e-8     # on q = n (1-a)^2 - lambda, scaled by n
_SMALL_LAMBDA = 1e-6   # below this, d_n' switches to the jet derivative

_NEG_INF = float("-inf")


class BranchPointError(ValueError):
    """Delta(lambda) is at or below zero: closed form has no real branch."""


class PoleProximityError(ValueError):
    """Argument sits on a removable pole of a helper; perturb lambda."""


# ----------------------------
# gamma / Delta and the p recurrence
# ----------------------------

class GammaDelta(NamedTuple):
    gamma1: object  # real or Jet
    gamma2: object
    delta: object


def gamma_delta(lam, alpha: float) -> GammaDelta:
    """Roots gamma1 >= gamma2 of y^2 - (1-lam+a^2) y + a^2 and their
    discriminant Delta = (1-lam+a^2)^2 - 4 a^2.

    The smaller root comes from gamma1 * gamma2 = a^2 rather than the
    subtractive formula, so it stays accurate when Delta ~ b^2.
    """
    a = float(alpha)
    if isinstance(lam, Jet):
        b = 1.0 - lam + a * a
        # factored discriminant (b-2a)(b+2a) dodges the b^2 - 4a^2
        # cancellation near |a| = 1
        delta = tj.jet_mul(b - 2.0 * a, b + 2.0 * a)
        if delta.coeffs[..., 0].min() <= 0.0:
            raise BranchPointError(
                "Delta constant term <= 0; fall back to recurrence evaluation")
        sq = tj.jet_sqrt(delta)
        g1 = (b + sq) * 0.5
        g2 = tj.jet_div(tj.constant(np.full(g1.batch_shape, a * a), g1.order), g1) \
            if a != 0.0 else tj.constant(np.zeros(g1.batch_shape), g1.order)
        return GammaDelta(g1, g2, delta)
    b = 1.0 - float(lam) + a * a
    delta = (b - 2.0 * a) * (b + 2.0 * a)
    if delta <= 0.0:
        raise BranchPointError(
            "Delta <= 0; fall back to recurrence evaluation")
    sq = math.sqrt(delta)
    if b >= 0.0:
        g1 = 0.5 * (b + sq)
        g2 = (a * a) / g1 if g1 != 0.0 else 0.0
    else:
        g2 = 0.5 * (b - sq)
        g1 = (a * a) / g2
    return GammaDelta(g1, g2, delta)


def p_poly(m: int, lam, alpha: float):
    """Three-term recurrence p_m = (1-lam+a^2) p_{m-1} - a^2 p_{m-2},
    p_{-1} = 0, p_0 = 1.  Branch-free; works on reals, arrays, and jets."""
    m = int(m)
    if m < -1:
        raise ValueError("need m >= -1")
    a2 = float(alpha) ** 2
    if isinstance(lam, Jet):
        prev = tj.constant(np.zeros(lam.batch_shape), lam.order)   # p_{-1}
        cur = tj.constant(np.ones(lam.batch_shape), lam.order)     # p_0
        if m == -1:
            return prev
        b = 1.0 - lam + a2
        for _ in range(m):
            prev, cur = cur, tj.jet_mul(b, cur) - a2 * prev
        return cur
    lam = np.asarray(lam, dtype=float)
    prev = np.zeros(lam.shape)
    cur = np.ones(lam.shape)
    if m == -1:
        return prev if prev.ndim else 0.0
    b = 1.0 - lam + a2
    for _ in range(m):
        prev, cur = cur, b * cur - a2 * prev
    return cur if cur.ndim else float(cur)


# ----------------------------
# signed log-magnitude helpers (real path)
# ----------------------------

def _slog_const(x: float):
    if x == 0.0:
        return 0.0, _NEG_INF
    return math.copysign(1.0, x), math.log(abs(x))


def _signed_logsumexp(signs, logs):
    """Sum of s_i * exp(l_i) terms along axis 0, returned as (sign, log)."""
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    m = np.max(logs, axis=0)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(invalid="ignore"):
        tot = np.sum(signs * np.exp(logs - safe_m), axis=0)
    sign = np.sign(tot)
    with np.errstate(divide="ignore"):
        logmag = np.where(tot != 0.0, safe_m + np.log(np.abs(tot)), _NEG_INF)
    logmag = np.where(np.isfinite(m), logmag, _NEG_INF)
    return sign, logmag


class _ClosedPieces(NamedTuple):
    """Shared log-domain ingredients of the closed forms at z = lam/n."""
    z: np.ndarray
    lg1: np.ndarray        # log gamma1(z)
    logw: np.ndarray       # log (gamma2/gamma1), -inf when alpha == 0
    log_delta: np.ndarray
    log_b: np.ndarray      # log (1 - z + a^2) = log (gamma1 + gamma2)
    sign_q: np.ndarray
    log_q: np.ndarray      # q = n (1-a)^2 - lam
    sign_lam: np.ndarray
    log_lam: np.ndarray


def _closed_pieces(n: int, a: float, lam: np.ndarray) -> _ClosedPieces:
    z = lam / n
    b = 1.0 - z + a * a
    delta = (b - 2.0 * a) * (b + 2.0 * a)
    sq = np.sqrt(delta)
    g1 = 0.5 * (b + sq)  # b > 2|a| >= 0 throughout the guarded region
    lg1 = np.log(g1)
    if a == 0.0:
        logw = np.full(lam.shape, _NEG_INF)
    else:
        logw = 2.0 * math.log(abs(a)) - 2.0 * lg1  # w = a^2 / gamma1^2
    q = n * (1.0 - a) ** 2 - lam
    with np.errstate(divide="ignore"):
        log_q = np.where(q != 0.0, np.log(np.abs(q)), _NEG_INF)
        log_lam = np.where(lam != 0.0, np.log(np.abs(lam)), _NEG_INF)
    return _ClosedPieces(
        z=z, lg1=lg1, logw=logw, log_delta=np.log(delta), log_b=np.log(b),
        sign_q=np.sign(q), log_q=log_q,
        sign_lam=np.sign(lam), log_lam=log_lam)


def _log_sum_pow(pc: _ClosedPieces, k: int):
    """log (gamma1^k + gamma2^k)."""
    return k * pc.lg1 + np.log1p(np.exp(k * pc.logw))


def _log_diff_pow(pc: _ClosedPieces, k: int):
    """log (gamma1^k - gamma2^k); needs w < 1 (guarded)."""
    return k * pc.lg1 + np.log1p(-np.exp(k * pc.logw))


def _dn_closed_terms(n: int, a: float, pc: _ClosedPieces, drop_lambda: bool):
    """The ten closed-form terms as (sign, log) arrays.

    With drop_lambda=True the explicit lambda factor of terms 3..10 is
    removed analytically (terms 1..2 are then omitted); that quotient is
    exactly (d_n - p_n + a^2 p_{n-1})/lambda, finite at lambda = 0.
    """
    ln_n = math.log(n)
    shape = pc.z.shape
    signs, logs = [], []

    def push(sign_arr, log_arr):
        signs.append(np.broadcast_to(sign_arr, shape))
        logs.append(np.broadcast_to(log_arr, shape))

    if drop_lambda:
        s_lam = np.ones(shape)
        l_lam = np.zeros(shape)
    else:
        s_lam = pc.sign_lam
        l_lam = pc.log_lam
        # term 1: (g1^{n+1} - g2^{n+1}) / sqrt(Delta)
        push(1.0, _log_diff_pow(pc, n + 1) - 0.5 * pc.log_delta)
        # term 2: -a^2 (g1^n - g2^n) / sqrt(Delta)
        if a != 0.0:
            push(-1.0,
                 2.0 * math.log(abs(a)) + _log_diff_pow(pc, n) - 0.5 * pc.log_delta)

    # term 3: + lam (g1^{n+1} + g2^{n+1}) / (n Delta)
    push(s_lam, l_lam + _log_sum_pow(pc, n + 1) - ln_n - pc.log_delta)
    if a != 0.0:
        la = math.log(abs(a))
        sa = math.copysign(1.0, a)
        sq_ = pc.sign_q
        lq_ = pc.log_q
        # term 4: - (n-1) a^2 lam (g1^n + g2^n) / (n^2 Delta)
        if n > 1:
            push(-s_lam,
                 math.log(n - 1) + 2.0 * la + l_lam + _log_sum_pow(pc, n)
                 - 2.0 * ln_n - pc.log_delta)
            # term 5: + 2 (n-1) a lam (g1^{n+1} + g2^{n+1}) / (n Delta q)
            push(sa * s_lam * sq_,
                 math.log(2.0 * (n - 1)) + la + l_lam + _log_sum_pow(pc, n + 1)
                 - ln_n - pc.log_delta - lq_)
        # term 6: - 2 (n-2) a^3 lam (g1^n + g2^n) / (n Delta q)
        if n != 2:
            s6, l6 = _slog_const(-2.0 * (n - 2) * a**3)
            push(s6 * s_lam * sq_,
                 l6 + l_lam + _log_sum_pow(pc, n) - ln_n - pc.log_delta - lq_)
        # term 7: - 2 (n+1) a^2 lam (g1^n + g2^n) / (n Delta q)
        push(-s_lam * sq_,
             math.log(2.0 * (n + 1)) + 2.0 * la + l_lam + _log_sum_pow(pc, n)
             - ln_n - pc.log_delta - lq_)
        # term 8: + 2 a^4 lam (g1^{n-1} + g2^{n-1}) / (Delta q)   [no 1/n]
        push(s_lam * sq_,
             math.log(2.0) + 4.0 * la + l_lam + _log_sum_pow(pc, n - 1)
             - pc.log_delta - lq_)
        # term 9: + 2 a^{n+1} (1-a) lam (g1 + g2) / (n Delta q)
        s9 = sa ** (n + 1)
        push(s9 * s_lam * sq_,
             math.log(2.0) + (n + 1) * la + math.log(1.0 - a) + l_lam
             + pc.log_b - ln_n - pc.log_delta - lq_)
        # term 10: + 4 a^{n+2} (1-a) lam / (n Delta q)
        s10 = sa ** (n + 2)
        push(s10 * s_lam * sq_,
             math.log(4.0) + (n + 2) * la + math.log(1.0 - a) + l_lam
             - ln_n - pc.log_delta - lq_)
    return signs, logs


# ----------------------------
# recurrence fallback (branch-free, works on reals and jets)
# ----------------------------

def _dn_recurrence(n: int, a: float, lam):
    """d_n via the tridiagonal-plus-rank-one expansion:

        d_n(lam) = q_n(z) + (lam/n^2) sum_{j,k} a^{|k-j|} q_{min-1}(z) p_{n-max}(z)

    with z = lam/n, q_m = p_m - a^2 p_{m-1}.  The double sum collapses to
    O(n) through the running sum T_{k+1} = a (T_k + q_{k-1})."""
    a2 = a * a
    is_jet = isinstance(lam, Jet)
    if is_jet:
        z = lam / n
        b = 1.0 - z + a2
        zero = tj.constant(np.zeros(lam.batch_shape), lam.order)
        one = tj.constant(np.ones(lam.batch_shape), lam.order)
        p = [zero, one]                     # p[i] holds p_{i-1}
        for _ in range(n):
            p.append(tj.jet_mul(b, p[-1]) - a2 * p[-2])
        q = [p[i + 1] - a2 * p[i] for i in range(0, n + 1)]   # q_0 .. q_n
        diag = zero
        for i in range(1, n + 1):
            diag = diag + tj.jet_mul(q[i - 1], p[n - i + 1])
        cross = zero
        T = zero
        for k in range(2, n + 1):
            T = a * (T + q[k - 2])
            cross = cross + tj.jet_mul(T, p[n - k + 1])
        return q[n] + (lam / float(n * n)) * (diag + 2.0 * cross)
    z = lam / n
    b = 1.0 - z + a2
    p = [0.0, 1.0]                          # p[i] holds p_{i-1}
    for _ in range(n):
        p.append(b * p[-1] - a2 * p[-2])
    q = [p[i + 1] - a2 * p[i] for i in range(0, n + 1)]
    diag = 0.0
    for i in range(1, n + 1):
        diag += q[i - 1] * p[n - i + 1]
    cross = 0.0
    T = 0.0
    for k in range(2, n + 1):
        T = a * (T + q[k - 2])
        cross += T * p[n - k + 1]
    return q[n] + (lam / (n * n)) * (diag + 2.0 * cross)


def _closed_ok_mask(n: int, a: float, lam: np.ndarray) -> np.ndarray:
    # the log path wants both roots real AND positive: b > 2|a| > 0;
    # b < 0 (lambda beyond n (1+|a|)^2) goes to the recurrence as well
    z = lam / n
    b = 1.0 - z + a * a
    delta = (b - 2.0 * a) * (b + 2.0 * a)
    q = n * (1.0 - a) ** 2 - lam
    return (delta > _BRANCH_GUARD * (1.0 + np.abs(z)) ** 2) \
        & (b > 0.0) \
        & (np.abs(q) > _POLE_GUARD * n)


# ----------------------------
# d_n and its log form
# ----------------------------

def _dn_closed_jet(n: int, a: float, lam: Jet) -> Jet:
    z0 = np.asarray(lam.coeffs[..., 0]) / n
    if np.min(1.0 - z0 + a * a) <= 0.0:
        raise BranchPointError("negative-root region; use the recurrence")
    gd = gamma_delta(lam / n, a)
    g1, g2, delta = gd
    if np.min(delta.coeffs[..., 0] - _BRANCH_GUARD * (1.0 + np.abs(z0)) ** 2) <= 0.0:
        raise BranchPointError("Delta constant term within branch guard")
    q = n * (1.0 - a) ** 2 - lam
    if np.min(np.abs(q.coeffs[..., 0])) <= _POLE_GUARD * n:
        raise PoleProximityError("lambda sits on the removable pole n(1-a)^2")
    sqd = tj.jet_sqrt(delta)
    pow1 = {k: tj.jet_powi(g1, k) for k in (n - 1, n, n + 1)}
    pow2 = {k: tj.jet_powi(g2, k) for k in (n - 1, n, n + 1)}
    inv_sq = tj.jet_div(pow1[n + 1] - pow2[n + 1], sqd)
    total = inv_sq \
        - a * a * tj.jet_div(pow1[n] - pow2[n], sqd)
    lam_over = tj.jet_div(lam, delta)
    total = total + (1.0 / n) * tj.jet_mul(lam_over, pow1[n + 1] + pow2[n + 1])
    if a != 0.0:
        lam_over_q = tj.jet_div(lam_over, q)   # lam / (Delta q)
        s_np1 = pow1[n + 1] + pow2[n + 1]
        s_n = pow1[n] + pow2[n]
        s_nm1 = pow1[n - 1] + pow2[n - 1]
        total = total \
            - ((n - 1) * a * a / n**2) * tj.jet_mul(lam_over, s_n) \
            + (2.0 * (n - 1) * a / n) * tj.jet_mul(lam_over_q, s_np1) \
            - (2.0 * (n - 2) * a**3 / n) * tj.jet_mul(lam_over_q, s_n) \
            - (2.0 * (n + 1) * a * a / n) * tj.jet_mul(lam_over_q, s_n) \
            + 2.0 * a**4 * tj.jet_mul(lam_over_q, s_nm1) \
            + (2.0 * a ** (n + 1) * (1.0 - a) / n) * tj.jet_mul(lam_over_q, g1 + g2) \
            + (4.0 * a ** (n + 2) * (1.0 - a) / n) * lam_over_q
    return total


def d_n(n: int, alpha: float, lam):
    """det(I_n - lam K_n), scalar-generic.

    Accepts a real scalar, a numpy array (vectorized over lambda), or a Jet.
    Values that overflow the double range come back as +-inf; use
    d_n_sign_log when only the magnitude's log is needed.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    a = float(alpha)
    if not abs(a) < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    if isinstance(lam, Jet):
        if n == 1:
            return tj.constant(np.ones(lam.batch_shape), lam.order)
        try:
            return _dn_closed_jet(n, a, lam)
        except (BranchPointError, PoleProximityError):
            return _dn_recurrence(n, a, lam)
    arr = np.asarray(lam, dtype=float)
    scalar_in = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if n == 1:
        out = np.ones(arr.shape)
        return float(out[0]) if scalar_in else out
    sign, logmag = d_n_sign_log(n, a, arr)
    with np.errstate(over="ignore"):
        out = sign * np.exp(logmag)
    return float(out[0]) if scalar_in else out


def d_n_sign_log(n: int, alpha: float, lam):
    """(sign, log|d_n|) arrays; the overflow-proof face of d_n."""
    n = int(n)
    a = float(alpha)
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    sign = np.empty(arr.shape)
    logmag = np.empty(arr.shape)
    if n == 1:
        sign.fill(1.0)
        logmag.fill(0.0)
        return sign, logmag
    ok = _closed_ok_mask(n, a, arr)
    if np.any(ok):
        pc = _closed_pieces(n, a, arr[ok])
        signs, logs = _dn_closed_terms(n, a, pc, drop_lambda=False)
        s, l = _signed_logsumexp(signs, logs)
        sign[ok] = s
        logmag[ok] = l
    if not np.all(ok):
        for idx in np.flatnonzero(~ok):
            val = _dn_recurrence(n, a, float(arr[idx]))
            s, l = _slog_const(val)
            sign[idx] = s
            logmag[idx] = l
    return sign, logmag


# ----------------------------
# d_n' (explicit display) and the log-derivative ratio
# ----------------------------

def _helper_logs(pc: _ClosedPieces, a: float, k: int):
    """(sign, log) of p_k, r_k at z, all positive in the guarded region."""
    logp = _log_diff_pow(pc, k + 1) - 0.5 * pc.log_delta
    logr = _log_sum_pow(pc, k + 1) - pc.log_delta
    return logp, logr


def _dnprime_closed_sign_log(n: int, a: float, arr: np.ndarray):
    """The explicit derivative display, term by term in (sign, log) form.

    The leading (d_n - p_n + a^2 p_{n-1})/lambda quotient is evaluated with
    lambda cancelled analytically (terms 3..10 of the closed form divided
    by lambda), so nothing blows up as lambda -> 0."""
    pc = _closed_pieces(n, a, arr)
    shape = arr.shape
    signs, logs = _dn_closed_terms(n, a, pc, drop_lambda=True)

    def push(sign_arr, log_arr):
        signs.append(np.broadcast_to(np.asarray(sign_arr, dtype=float), shape))
        logs.append(np.broadcast_to(log_arr, shape))

    ln_n = math.log(n)
    logp_n, logr_n = _helper_logs(pc, a, n)
    logp_nm1, logr_nm1 = _helper_logs(pc, a, n - 1)
    logp_nm2, logr_nm2 = _helper_logs(pc, a, n - 2)
    log_r0 = pc.log_b - pc.log_delta                      # r_0 = b / Delta
    u = (1.0 - a) ** 2 - pc.z                             # l1 = 1/(Delta u)
    sign_u = np.sign(u)
    with np.errstate(divide="ignore"):
        log_u = np.where(u != 0.0, np.log(np.abs(u)), _NEG_INF)
    log_l1 = -pc.log_delta - log_u
    v = 3.0 * (np.exp(pc.log_b)) + 2.0 * a                # 3(g1+g2) + 2a > 0
    log_l2 = np.log(v) + log_l1
    s_lam, l_lam = pc.sign_lam, pc.log_lam

    # - ((n+1)/n) r_n
    push(-1.0, math.log((n + 1) / n) + logr_n)
    # + (1/n) r_0 p_n
    push(1.0, -ln_n + log_r0 + logp_n)
    if a != 0.0:
        la2 = 2.0 * math.log(abs(a))
        # + a^2 r_{n-1}
        push(1.0, la2 + logr_nm1)
        # - (a^2/n) r_0 p_{n-1}
        push(-1.0, la2 - ln_n + log_r0 + logp_nm1)
    # - ((n+1)/n^2) (lam/Delta) p_n
    push(-s_lam, math.log(n + 1) - 2.0 * ln_n + l_lam - pc.log_delta + logp_n)
    # + (2/n^2) lam r_0 r_n
    push(s_lam, math.log(2.0) - 2.0 * ln_n + l_lam + log_r0 + logr_n)
    if a != 0.0:
        la = math.log(abs(a))
        sa = math.copysign(1.0, a)
        if n > 1:
            # + ((n-1) a^2 / n^2) (lam/Delta) p_{n-1}
            push(s_lam, math.log(n - 1.0) + 2 * la - 2 * ln_n + l_lam
                 - pc.log_delta + logp_nm1)
            # - (2 (n-1) a^2 / n^3) lam r_0 r_{n-1}
            push(-s_lam, math.log(2.0 * (n - 1)) + 2 * la - 3 * ln_n + l_lam
                 + log_r0 + logr_nm1)
            # - (2 (n^2-1) a / n^3) lam p_n l1
            push(-sa * s_lam * sign_u,
                 math.log(2.0 * (n * n - 1)) + la - 3 * ln_n + l_lam
                 + logp_n + log_l1)
            # + (2 (n-1) a / n^3) lam r_n l2
            push(sa * s_lam * sign_u,
                 math.log(2.0 * (n - 1)) + la - 3 * ln_n + l_lam
                 + logr_n + log_l2)
        if n != 2:
            s6, l6 = _slog_const(2.0 * (n - 2) * a**3)
            # + (2 (n-2) a^3 / n^2) lam p_{n-1} l1
            push(s6 * s_lam * sign_u,
                 l6 - 2 * ln_n + l_lam + logp_nm1 + log_l1)
            # - (2 (n-2) a^3 / n^3) lam r_{n-1} l2
            push(-s6 * s_lam * sign_u,
                 l6 - 3 * ln_n + l_lam + logr_nm1 + log_l2)
        # + (2 (n+1) a^2 / n^2) lam p_{n-1} l1
        push(s_lam * sign_u,
             math.log(2.0 * (n + 1)) + 2 * la - 2 * ln_n + l_lam
             + logp_nm1 + log_l1)
        # - (2 (n+1) a^2 / n^3) lam r_{n-1} l2
        push(-s_lam * sign_u,
             math.log(2.0 * (n + 1)) + 2 * la - 3 * ln_n + l_lam
             + logr_nm1 + log_l2)
        if n > 1:
            # - (2 (n-1) a^4 / n^2) lam p_{n-2} l1
            push(-s_lam * sign_u,
                 math.log(2.0 * (n - 1)) + 4 * la - 2 * ln_n + l_lam
                 + logp_nm2 + log_l1)
        # + (2 a^4 / n^2) lam r_{n-2} l2
        push(s_lam * sign_u,
             math.log(2.0) + 4 * la - 2 * ln_n + l_lam + logr_nm2 + log_l2)
        san1 = sa ** (n + 1)
        # - (2 a^{n+1} (1-a) / n^3) lam l1
        push(-san1 * s_lam * sign_u,
             math.log(2.0) + (n + 1) * la + math.log(1.0 - a) - 3 * ln_n
             + l_lam + log_l1)
        # + (2 a^{n+1} (1-a) / n^3) lam r_0 l2
        push(san1 * s_lam * sign_u,
             math.log(2.0) + (n + 1) * la + math.log(1.0 - a) - 3 * ln_n
             + l_lam + log_r0 + log_l2)
        san2 = sa ** (n + 2)
        # + (4 a^{n+2} (1-a) / n^3) (lam/Delta) l2
        push(san2 * s_lam * sign_u,
             math.log(4.0) + (n + 2) * la + math.log(1.0 - a) - 3 * ln_n
             + l_lam - pc.log_delta + log_l2)
    return _signed_logsumexp(signs, logs)


def d_n_prime_sign_log(n: int, alpha: float, lam):
    """(sign, log|d_n'|) arrays, with jet fallback off the closed form's
    domain and for |lambda| below the small-lambda switch."""
    n = int(n)
    a = float(alpha)
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    sign = np.empty(arr.shape)
    logmag = np.empty(arr.shape)
    if n == 1:
        sign.fill(0.0)
        logmag.fill(_NEG_INF)
        return sign, logmag
    ok = _closed_ok_mask(n, a, arr) & (np.abs(arr) >= _SMALL_LAMBDA) \
        & (np.abs((1.0 - a) ** 2 - arr / n) > 1e-12 * (1.0 + np.abs(arr / n)))
    if np.any(ok):
        s, l = _dnprime_closed_sign_log(n, a, arr[ok])
        sign[ok] = s
        logmag[ok] = l
    if not np.all(ok):
        bad = ~ok
        jet = d_n(n, a, tj.variable(arr[bad], order=1))
        der = np.asarray(jet.coeffs[..., 1], dtype=float)
        sign[bad] = np.sign(der)
        with np.errstate(divide="ignore"):
            logmag[bad] = np.log(np.abs(der))
    return sign, logmag


def d_n_prime(n: int, alpha: float, lam):
    """Derivative of d_n at real lambda (vectorized over arrays)."""
    arr = np.asarray(lam, dtype=float)
    scalar_in = arr.ndim == 0
    sign, logmag = d_n_prime_sign_log(n, alpha, np.atleast_1d(arr))
    with np.errstate(over="ignore"):
        out = sign * np.exp(logmag)
    return float(out[0]) if scalar_in else out


def derivative_ratio(n: int, alpha: float, lam):
    """d_n'(lam) / d_n(lam), formed from the two log representations so the
    ratio survives arguments where either value alone would overflow."""
    arr = np.asarray(lam, dtype=float)
    scalar_in = arr.ndim == 0
    flat = np.atleast_1d(arr)
    sp, lp = d_n_prime_sign_log(n, alpha, flat)
    sd, ld = d_n_sign_log(n, alpha, flat)
    if np.any(sd == 0.0):
        raise ZeroDivisionError("d_n vanished at a requested lambda")
    with np.errstate(over="ignore"):
        out = sp * sd * np.exp(lp - ld)
    return float(out[0]) if scalar_in else out


# ----------------------------
# helper quadruple, determinant oracle, asymptotic form
# ----------------------------

class HelperValues(NamedTuple):
    p: float
    r: float
    l1: float
    l2: float


def r_l_helpers(m: int, lam: float, alpha: float) -> HelperValues:
    """p_m, r_m, l1, l2 at the given lambda:

        p_m = (g1^{m+1} - g2^{m+1})/sqrt(Delta),  r_m = (g1^{m+1} + g2^{m+1})/Delta,
        l1  = 1/(Delta ((1-a)^2 - lam)),          l2  = (3(g1+g2) + 2a) l1.
    """
    m = int(m)
    if m < -1:
        raise ValueError("need m >= -1")
    a = float(alpha)
    lam = float(lam)
    gd = gamma_delta(lam, a)   # raises BranchPointError when Delta <= 0
    if gd.delta < 1e-10 * (1.0 + abs(lam)) ** 2:
        raise PoleProximityError(
            "Delta too close to 0 for the helper quadruple; perturb lambda")
    u = (1.0 - a) ** 2 - lam
    if abs(u) < 1e-10 * (1.0 + abs(lam)):
        raise PoleProximityError(
            "lambda too close to the pole (1-a)^2; perturb lambda")
    g1, g2, delta = gd
    p = (g1 ** (m + 1) - g2 ** (m + 1)) / math.sqrt(delta)
    r = (g1 ** (m + 1) + g2 ** (m + 1)) / delta
    l1 = 1.0 / (delta * u)
    l2 = (3.0 * (g1 + g2) + 2.0 * a) * l1
    return HelperValues(p, r, l1, l2)


def det_oracle(n: int, alpha: float, lam: float) -> float:
    """Brute-force det(I - lam K_n) by Gaussian elimination with symmetric
    (diagonal) pivoting, accumulated as sign and log magnitude."""
    n = int(n)
    if n > 400:
        raise ValueError("det_oracle capped at n = 400 (O(n^3) cost)")
    from .kernel_spectrum import build_kernel
    m = np.eye(n) - float(lam) * build_kernel(n, alpha).entries
    sign = 1.0
    logmag = 0.0
    for k in range(n):
        d = np.abs(np.diag(m)[k:])
        j = k + int(np.argmax(d))
        if j != k:
            # symmetric row+column swap: two transpositions, sign unchanged
            m[[k, j], :] = m[[j, k], :]
            m[:, [k, j]] = m[:, [j, k]]
        piv = m[k, k]
        if piv == 0.0:
            return 0.0
        sign *= math.copysign(1.0, piv)
        logmag += math.log(abs(piv))
        if k + 1 < n:
            m[k + 1:, k + 1:] -= np.outer(m[k + 1:, k], m[k, k + 1:]) / piv
    with np.errstate(over="ignore"):
        return sign * math.exp(logmag) if logmag < 709 else sign * math.inf


def d_n_asymptotic_exponent(t: float, n: int, alpha: float) -> float:
    """Leading-order exponent of d_n evaluated at lam = t sqrt(n ln n)."""
    n = int(n)
    if n < 3:
        raise ValueError("asymptotic form needs n >= 3")
    a2 = float(alpha) ** 2
    one = 1.0 - a2
    ln_n = math.log(n)
    t = float(t)
    return (
        -t * math.sqrt(n * ln_n) / one
        - ((1.0 + a2) ** 2 * t * t / (4.0 * one**3)
           + t * t / (2.0 * one**2)
           - t * t / (4.0 * one)) * ln_n
    )


def d_n_asymptotic(t: float, n: int, alpha: float) -> float:
    """exp of the asymptotic exponent with all o(1) corrections dropped."""
    return math.exp(d_n_asymptotic_exponent(t, n, alpha))
