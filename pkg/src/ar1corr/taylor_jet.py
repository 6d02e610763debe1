"""Truncated Taylor series ("jet") arithmetic.

A jet of order K stores coefficients (c_0, ..., c_K) of a truncated Taylor
expansion along one perturbation variable.  Arithmetic on jets propagates
derivatives exactly through order K, which is how the rest of the package
extracts high-order partial derivatives of moment generating functions
without symbolic algebra.

Coefficient storage is a numpy array whose LAST axis is the Taylor axis, so
a jet may carry leading batch dimensions (shape (..., K+1)) and one jet
operation then evaluates a whole panel of quadrature nodes at once.  Batch
dimensions broadcast like numpy ufuncs.

Jets are immutable after construction (the coefficient array is marked
read-only); all operations return new instances, so values can be shared
freely across threads.
"""

from __future__ import annotations

import math

import numpy as np

DEFAULT_ORDER = 10  # highest moment the package reproduces is the 10th


# ----------------------------
# core type
# ----------------------------

class Jet:
    """Truncated Taylor polynomial of fixed order with batched coefficients."""

    __slots__ = ("coeffs",)

    # keep numpy from hijacking ndarray <op> Jet into an elementwise object
    # mess; with this set, numpy returns NotImplemented and Python falls
    # through to our reflected operators
    __array_ufunc__ = None

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=float)
        if arr.ndim == 0:
            raise ValueError("jet coefficients need at least one axis (the Taylor axis)")
        if arr.shape[-1] < 1:
            raise ValueError("a jet needs at least a constant coefficient")
        # fail fast: a silent NaN would corrupt every quadrature sum downstream
        if np.isnan(arr).any():
            raise ValueError("NaN coefficient in jet")
        arr.flags.writeable = False
        self.coeffs = arr

    # -- introspection --------------------------------------------------

    @property
    def order(self) -> int:
        return self.coeffs.shape[-1] - 1

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        """Constant (order-0) coefficient, scalar if unbatched."""
        c0 = self.coeffs[..., 0]
        return float(c0) if c0.ndim == 0 else c0

    def __repr__(self):
        if self.batch_shape:
            return f"Jet(order={self.order}, batch={self.batch_shape})"
        return f"Jet({np.array2string(self.coeffs, precision=6)})"

    # -- operator sugar; scalars promote to constant jets ---------------

    def __add__(self, other):
        return jet_add(self, _coerce(other, self))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs)

    def __sub__(self, other):
        return jet_add(self, -_coerce(other, self))

    def __rsub__(self, other):
        return jet_add(_coerce(other, self), -self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * np.asarray(other, dtype=float)[..., None])
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / np.asarray(other, dtype=float)[..., None])
        return jet_div(self, other)

    def __rtruediv__(self, other):
        return jet_div(_coerce(other, self), self)

    def __pow__(self, p):
        return jet_powi(self, p)


def constant(value, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of a constant: c_0 = value, higher coefficients 0.

    value may be an array, giving a batched constant jet.
    """
    base = np.asarray(value, dtype=float)
    coeffs = np.zeros(base.shape + (order + 1,))
    coeffs[..., 0] = base
    return Jet(coeffs)


def variable(value, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of the perturbation variable itself: c_0 = value, c_1 = 1."""
    base = np.asarray(value, dtype=float)
    coeffs = np.zeros(base.shape + (order + 1,))
    coeffs[..., 0] = base
    coeffs[..., 1] = 1.0
    return Jet(coeffs)


def _coerce(x, like: Jet) -> Jet:
    # scalars and arrays both promote to constant jets; array batch shapes
    # broadcast against `like` inside the arithmetic kernels
    if isinstance(x, Jet):
        return x
    return constant(x, like.order)


def _check_orders(a: Jet, b: Jet):
    if a.order != b.order:
        raise ValueError(
            f"jet order mismatch: {a.order} vs {b.order}; "
            "jets of different orders cannot be combined"
        )


# ----------------------------
# arithmetic
# ----------------------------

def jet_add(a: Jet, b: Jet) -> Jet:
    """Coefficientwise sum of two jets of equal order."""
    _check_orders(a, b)
    return Jet(a.coeffs + b.coeffs)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product: c_k = sum_{i+j=k} a_i b_j."""
    _check_orders(a, b)
    K = a.order
    ac, bc = a.coeffs, b.coeffs
    shape = np.broadcast_shapes(ac.shape[:-1], bc.shape[:-1])
    out = np.zeros(shape + (K + 1,))
    for k in range(K + 1):
        s = ac[..., 0] * bc[..., k]
        for i in range(1, k + 1):
            s = s + ac[..., i] * bc[..., k - i]
        out[..., k] = s
    return Jet(out)


def jet_div(a: Jet, b: Jet) -> Jet:
    """Division a/b by the standard coefficient recurrence; needs b.c0 != 0."""
    _check_orders(a, b)
    b0 = b.coeffs[..., 0]
    if np.any(b0 == 0.0):
        raise ZeroDivisionError("jet division by zero constant term")
    K = a.order
    ac, bc = a.coeffs, b.coeffs
    shape = np.broadcast_shapes(ac.shape[:-1], bc.shape[:-1])
    out = np.zeros(shape + (K + 1,))
    out[..., 0] = ac[..., 0] / b0
    for k in range(1, K + 1):
        s = ac[..., k] + np.zeros(shape)
        for i in range(1, k + 1):
            s = s - bc[..., i] * out[..., k - i]
        out[..., k] = s / b0
    return Jet(out)


def jet_sqrt(a: Jet) -> Jet:
    """Square root by the standard recurrence; needs a.c0 > 0 strictly."""
    a0 = a.coeffs[..., 0]
    if np.any(a0 <= 0.0):
        raise ValueError("jet_sqrt needs a strictly positive constant term")
    K = a.order
    ac = a.coeffs
    out = np.zeros(ac.shape)
    s0 = np.sqrt(a0)
    out[..., 0] = s0
    # 2 s0 s_k = a_k - sum_{i=1}^{k-1} s_i s_{k-i}
    for k in range(1, K + 1):
        s = ac[..., k] + np.zeros(ac.shape[:-1])
        for i in range(1, k):
            s = s - out[..., i] * out[..., k - i]
        out[..., k] = s / (2.0 * s0)
    return Jet(out)


def jet_powi(a: Jet, p: int) -> Jet:
    """Integer power by repeated squaring; negative p needs a.c0 != 0."""
    p = int(p)
    if p < 0:
        if np.any(a.coeffs[..., 0] == 0.0):
            raise ZeroDivisionError("negative jet power with zero constant term")
        return jet_div(constant(np.ones(a.batch_shape), a.order), jet_powi(a, -p))
    result = constant(np.ones(a.batch_shape), a.order)
    base = a
    while p > 0:
        if p & 1:
            result = jet_mul(result, base)
        base_needed = p > 1
        if base_needed:
            base = jet_mul(base, base)
        p >>= 1
    return result


def extract_derivative(a: Jet, m: int):
    """m-th derivative carried by the jet: m! * c_m.

    Returns a scalar for unbatched jets, an array otherwise.
    """
    m = int(m)
    if m < 0 or m > a.order:
        raise ValueError(f"derivative order {m} outside jet order {a.order}")
    val = math.factorial(m) * a.coeffs[..., m]
    return float(val) if val.ndim == 0 else val
