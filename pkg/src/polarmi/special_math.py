r"""Special functions used throughout the package.

Modified Bessel functions of the first kind (orders 0 and 1, plain and
exponentially scaled), the error function, the order-1/2 Laguerre function
:math:`L_{1/2}(-\lambda)`, the normalized Rice variance :math:`f(\lambda)` and a
stable log-sum-exp.

All functions accept scalars or numpy arrays.  Scalar input gives a Python
``float`` back.
"""

import math

import numpy as np
from scipy import special as _sp

EULER_GAMMA = 0.57721566490153286061
LOG2E = 1.0 / math.log(2.0)

# Power series below, large-argument expansion above.
_BESSEL_CROSSOVER = 15.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 45

# f(lambda) switches to its large-lambda expansion above this point.
_F_ASYMPTOTIC_FROM = 100.0


def _checked(x, name="x", allow_negative=False):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if not allow_negative and np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def _out(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def _series_scaled(x, order):
    # sum_k (x/2)^(2k+order) / (k! (k+order)!), times exp(-x)
    q = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + order))
        total += term
    return total * np.exp(-x)


def _asymptotic_scaled(x, order):
    # e^{-x} I_v(x) ~ (2 pi x)^{-1/2} sum_k a_k, truncated at the smallest term
    u = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_TERMS):
        nxt = -term * (u - (2 * k - 1) ** 2) / (8.0 * k * x)
        active &= np.abs(nxt) < np.abs(term)
        if not active.any():
            break
        total = np.where(active, total + nxt, total)
        term = np.where(active, nxt, term)
    return total / np.sqrt(2.0 * np.pi * x)


def _scaled(x, order):
    out = np.empty_like(x)
    small = x < _BESSEL_CROSSOVER
    if small.any():
        out[small] = _series_scaled(x[small], order)
    if (~small).any():
        out[~small] = _asymptotic_scaled(x[~small], order)
    return out


def bessel_i0_scaled(x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I0(x)``.

    Never overflows; decreases monotonically from 1 at ``x = 0``.
    """
    arr = _checked(x)
    return _out(_scaled(np.atleast_1d(arr).astype(float), 0).reshape(arr.shape), x)


def bessel_i1_scaled(x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I1(x)``."""
    arr = _checked(x)
    return _out(_scaled(np.atleast_1d(arr).astype(float), 1).reshape(arr.shape), x)


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Overflows to ``inf`` beyond x ~ 713; use :func:`bessel_i0_scaled` there.
    """
    arr = _checked(x)
    flat = np.atleast_1d(arr).astype(float)
    with np.errstate(over="ignore"):
        val = _scaled(flat, 0) * np.exp(flat)
    return _out(val.reshape(arr.shape), x)


def bessel_i1(x):
    """Modified Bessel function of the first kind, order one."""
    arr = _checked(x)
    flat = np.atleast_1d(arr).astype(float)
    with np.errstate(over="ignore"):
        val = _scaled(flat, 1) * np.exp(flat)
    return _out(val.reshape(arr.shape), x)


def log_bessel_i0(x):
    """``log I0(x)`` without overflow."""
    arr = _checked(x)
    flat = np.atleast_1d(arr).astype(float)
    return _out((flat + np.log(_scaled(flat, 0))).reshape(arr.shape), x)


def erf(x):
    """Error function ``2/sqrt(pi) * int_0^x exp(-t^2) dt``."""
    arr = _checked(x, allow_negative=True)
    return _out(_sp.erf(arr), x)


def erfcx(x):
    """Scaled complementary error function ``exp(x^2) * erfc(x)``."""
    arr = _checked(x, allow_negative=True)
    return _out(_sp.erfcx(arr), x)


def laguerre_half(lam):
    r"""Laguerre function :math:`L_{1/2}(-\lambda)` for :math:`\lambda \ge 0`.

    Evaluated as ``(1 + lam) i0e(lam/2) + lam i1e(lam/2)``, which equals
    ``exp(-lam/2) [(1 + lam) I0(lam/2) + lam I1(lam/2)]`` without the overflow.
    """
    arr = _checked(lam, "lambda")
    flat = np.atleast_1d(arr).astype(float)
    half = 0.5 * flat
    val = (1.0 + flat) * _scaled(half, 0) + flat * _scaled(half, 1)
    return _out(val.reshape(arr.shape), lam)


def _f_lambda_large(lam):
    # f = 1/2 - S - (1/2 + S)^2 / (4 lam), S = sum_n Gamma(n+1/2)^2 / (2 pi (n+1)!) lam^-n.
    # The two large terms of 1 + lam - (pi/4) L^2 cancel analytically here.
    coef = 1.0 / 16.0  # n = 1
    term = coef / lam
    s = term.copy()
    for n in range(2, 40):
        # c_n / c_{n-1} = (n - 1/2)^2 / (n + 1)
        nxt = term * (n - 0.5) ** 2 / ((n + 1) * lam)
        if np.all(np.abs(nxt) < 1e-18 * np.abs(s)):
            break
        s += nxt
        term = nxt
    return 0.5 - s - (0.5 + s) ** 2 / (4.0 * lam)


def f_lambda(lam):
    r"""Normalized conditional Rice variance ``Var[Y|X=x] / N0`` with ``lam = x^2/N0``.

    ``f(lam) = 1 + lam - (pi/4) L_{1/2}(-lam)^2``; lies in (0, 1/2) and tends
    to 1/2 from below as ``lam`` grows.
    """
    arr = _checked(lam, "lambda")
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    big = flat > _F_ASYMPTOTIC_FROM
    small = ~big
    if small.any():
        lag = laguerre_half(flat[small])
        out[small] = 1.0 + flat[small] - 0.25 * np.pi * lag * lag
    if big.any():
        out[big] = _f_lambda_large(flat[big])
    return _out(out.reshape(arr.shape), lam)


def log_sum_exp(values, axis=None):
    """``log(sum(exp(values)))`` shifted by the maximum for stability."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("log_sum_exp needs at least one value")
    m = np.max(v, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(v - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)
