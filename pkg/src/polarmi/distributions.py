r"""Amplitude and phase densities for the complex AWGN channel ``Y = X + W``.

Every ``exp(a) * I0(b)`` product is evaluated as ``exp(a + b) * i0e(b)`` so
nothing overflows at high SNR.  Angles live in ``[-pi, pi)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .special_math import (bessel_i0_scaled, bessel_i1_scaled, erf, erfcx,
                           f_lambda)

_SQRT_PI = math.sqrt(math.pi)
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ChannelParams:
    """Symbol energy ``es`` and noise variance ``n0`` of ``W ~ CN(0, n0)``."""

    es: float
    n0: float

    def __post_init__(self):
        if not (self.es > 0 and math.isfinite(self.es)):
            raise ValueError("es must be positive and finite")
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise ValueError("n0 must be positive and finite")

    @classmethod
    def from_snr_db(cls, snr_db, es=1.0):
        return cls(es, es / 10.0 ** (snr_db / 10.0))

    @property
    def snr(self):
        return self.es / self.n0

    @property
    def snr_db(self):
        return 10.0 * math.log10(self.snr)

    @property
    def eta(self):
        return self.n0 / self.es


def _nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be finite and nonnegative")
    return arr


def _positive(x, name):
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"{name} must be positive and finite")
    return float(x)


def _angle(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _ret(val, *likes):
    if all(np.ndim(v) == 0 for v in likes):
        return float(val)
    return val


# --- Rice / Rayleigh ---------------------------------------------------------

def rice_logpdf(y_amp, x_amp, n0):
    """Natural log of :func:`rice_pdf`; ``-inf`` at ``y_amp = 0``."""
    y = _nonneg(y_amp, "y_amp")
    x = _nonneg(x_amp, "x_amp")
    n0 = _positive(n0, "n0")
    with np.errstate(divide="ignore"):
        val = (np.log(2.0 * y / n0) - (x - y) ** 2 / n0
               + np.log(bessel_i0_scaled(2.0 * x * y / n0)))
    return _ret(val, y_amp, x_amp)


def rice_pdf(y_amp, x_amp, n0):
    """Density of ``|x + W|`` for ``|x| = x_amp`` and ``W ~ CN(0, n0)``."""
    y = _nonneg(y_amp, "y_amp")
    x = _nonneg(x_amp, "x_amp")
    n0 = _positive(n0, "n0")
    val = (2.0 * y / n0) * np.exp(-(x - y) ** 2 / n0) * bessel_i0_scaled(2.0 * x * y / n0)
    return _ret(val, y_amp, x_amp)


def rice_mean(x_amp, n0):
    """``E[|x + W|]`` for ``|x| = x_amp``."""
    x = _nonneg(x_amp, "x_amp")
    n0 = _positive(n0, "n0")
    lam = x * x / n0
    val = (_SQRT_PI / (2.0 * math.sqrt(n0))
           * ((x * x + n0) * bessel_i0_scaled(0.5 * lam) + x * x * bessel_i1_scaled(0.5 * lam)))
    return _ret(val, x_amp)


def rice_second_moment(x_amp, n0):
    x = _nonneg(x_amp, "x_amp")
    n0 = _positive(n0, "n0")
    return _ret(n0 + x * x, x_amp)


def rice_variance(x_amp, n0):
    """``n0 * f(x_amp**2 / n0)``; always below ``n0 / 2``."""
    x = _nonneg(x_amp, "x_amp")
    n0 = _positive(n0, "n0")
    return _ret(n0 * f_lambda(x * x / n0), x_amp)


def rayleigh_out_pdf(y_amp, params):
    """Density of ``|Y|`` when ``X ~ CN(0, es)``: Rayleigh with ``E|Y|^2 = es + n0``."""
    y = _nonneg(y_amp, "y_amp")
    p = params.es + params.n0
    return _ret(2.0 * y / p * np.exp(-y * y / p), y_amp)


def rayleigh_pdf(x_amp, power):
    """Rayleigh density with mean square ``power``."""
    x = _nonneg(x_amp, "x_amp")
    power = _positive(power, "power")
    return _ret(2.0 * x / power * np.exp(-x * x / power), x_amp)


# --- Gaussian-input phase laws -----------------------------------------------

def phase_shape(y_amp, params):
    """``s = y_amp / sqrt(n0 (1 + eta))``, the only parameter of the phase posterior."""
    return np.asarray(y_amp, dtype=float) / math.sqrt(params.n0 * (1.0 + params.eta))


def phase_logpdf_from_shape(theta, s):
    r"""Log of the phase posterior as a function of ``theta`` and ``s``.

    The density is ``(1/2pi) e^{-s^2} + s cos(theta)/(2 sqrt(pi))
    e^{-s^2 sin^2 theta} [1 + erf(s cos theta)]``.  Written as
    ``e^{-s^2}/(2pi) [1 + sqrt(pi) z erfcx(-z)]`` with ``z = s cos theta``,
    which stays finite and nonnegative for any ``s``.
    """
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    z = s * np.cos(theta)
    base = -s * s - _LOG_2PI
    zp = np.maximum(z, 0.0)
    zn = np.minimum(z, 0.0)
    with np.errstate(divide="ignore"):
        # z > 0: add the two terms in log space (erfcx(-z) would overflow)
        second = (np.log(zp * (1.0 + erf(zp)) / (2.0 * _SQRT_PI))
                  - s * s + zp * zp)
        pos = np.logaddexp(base, second)
        # z <= 0: the bracket is a difference of two O(1) terms, stays >= 0
        bracket = 1.0 + _SQRT_PI * zn * erfcx(-zn)
        neg = base + np.log(np.maximum(bracket, 0.0))
    return np.where(z > 0, pos, neg)


def phase_posterior_pdf(y_ang, y_amp, params):
    """Density of the output phase given ``|Y| = y_amp`` and input phase 0 (Gaussian input)."""
    theta = _angle(y_ang, "y_ang")
    y = _nonneg(y_amp, "y_amp")
    s = phase_shape(y, params)
    return _ret(np.exp(phase_logpdf_from_shape(theta, s)), y_ang, y_amp)


def phase_posterior_pdf_direct(y_ang, y_amp, params):
    """Same density written literally with ``erf``; loses accuracy for large ``s``."""
    theta = _angle(y_ang, "y_ang")
    y = _nonneg(y_amp, "y_amp")
    d = params.n0 * (1.0 + params.eta)
    c = y * np.cos(theta)
    val = (np.exp(-y * y / d) / (2 * np.pi)
           + c / (2.0 * np.sqrt(np.pi * d)) * np.exp(-(y * np.sin(theta)) ** 2 / d)
           * (1.0 + erf(c / math.sqrt(d))))
    return _ret(val, y_ang, y_amp)


def phase_gaussian_approx_pdf(y_ang, y_amp, n0):
    """High-SNR approximation: ``N(0, n0 / (2 y_amp^2))`` in the phase."""
    theta = _angle(y_ang, "y_ang")
    y = _nonneg(y_amp, "y_amp")
    v = n0 / (y * y)
    return _ret(np.exp(-theta * theta / v) / np.sqrt(np.pi * v), y_ang, y_amp)


def posterior_joint_logpdf(x_amp, x_ang, y_amp, y_ang, params):
    """Log of :func:`posterior_joint_pdf`."""
    x = _nonneg(x_amp, "x_amp")
    xa = _angle(x_ang, "x_ang")
    y = _nonneg(y_amp, "y_amp")
    ya = _angle(y_ang, "y_ang")
    es, n0 = params.es, params.n0
    with np.errstate(divide="ignore"):
        val = (math.log((es + n0) / (math.pi * es * n0)) + np.log(x)
               + y * y / (es + n0) - x * x / es
               - (x * x + y * y - 2.0 * x * y * np.cos(ya - xa)) / n0)
    return _ret(val, x_amp, x_ang, y_amp, y_ang)


def posterior_joint_pdf(x_amp, x_ang, y_amp, y_ang, params):
    """Joint density of input amplitude and phase given the output (Gaussian input).

    Density with respect to ``d x_amp d x_ang``.
    """
    return _ret(np.exp(posterior_joint_logpdf(x_amp, x_ang, y_amp, y_ang, params)),
                x_amp, x_ang, y_amp, y_ang)


def posterior_amp_logpdf(x_amp, y_amp, params):
    x = _nonneg(x_amp, "x_amp")
    y = _nonneg(y_amp, "y_amp")
    n0, eta = params.n0, params.eta
    k = 2.0 * x * y / n0
    with np.errstate(divide="ignore"):
        val = (np.log(2.0 * x * (1.0 + eta) / n0)
               - ((1.0 + eta) * x - y) ** 2 / (n0 * (1.0 + eta))
               + np.log(bessel_i0_scaled(k)))
    return _ret(val, x_amp, y_amp)


def posterior_amp_pdf(x_amp, y_amp, params):
    """Density of the input amplitude given ``|Y| = y_amp`` (Gaussian input).

    A Rice law centred at ``y_amp / (1 + eta)``; does not depend on the
    output phase.
    """
    return _ret(np.exp(posterior_amp_logpdf(x_amp, y_amp, params)), x_amp, y_amp)


def posterior_phase_pdf(x_ang, y_amp, y_ang, params):
    """Density of the input phase given the output (Gaussian input).

    Identical to :func:`phase_posterior_pdf` evaluated at ``y_ang - x_ang``.
    """
    xa = _angle(x_ang, "x_ang")
    ya = _angle(y_ang, "y_ang")
    return _ret(phase_posterior_pdf(ya - xa, y_amp, params), x_ang, y_amp, y_ang)


# --- discrete-input phase law ----------------------------------------------

def apsk_phase_given_amp_pdf(y_ang, x_amp, y_amp, n0, constellation):
    """Density of the output phase given input ring ``x_amp`` and ``|Y| = y_amp``.

    An equal-weight mixture of von Mises laws centred on the constellation
    phases with concentration ``2 x_amp y_amp / n0``.
    """
    if not constellation.is_polar:
        raise ValueError("constellation is not amplitude x phase factorable")
    theta = _angle(y_ang, "y_ang")
    y = _nonneg(y_amp, "y_amp")
    n0 = _positive(n0, "n0")
    levels = constellation.amp_levels
    if not np.any(np.isclose(levels, x_amp, rtol=0, atol=1e-9)):
        raise ValueError(f"x_amp={x_amp!r} is not a ring of the constellation")
    kappa = 2.0 * float(x_amp) * y / n0
    phases = constellation.phase_levels
    shape = np.broadcast(theta, kappa).shape
    th = np.broadcast_to(theta, shape)[..., None]
    ka = np.broadcast_to(kappa, shape)[..., None]
    vm = np.exp(ka * (np.cos(th - phases) - 1.0)) / bessel_i0_scaled(ka)
    val = vm.mean(axis=-1) / (2.0 * np.pi)
    return _ret(val, y_ang, y_amp)
