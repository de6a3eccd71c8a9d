r"""Polar decomposition of ``I(X;Y)`` for Gaussian input ``X ~ CN(0, es)``.

Both the amplitude and phase terms reduce to one-dimensional expectations
over an exponential law with mean SNR:

* ``lam = |x|^2 / n0`` drives the conditional Rice entropy of ``|Y|``;
* ``s^2 = |y|^2 / (n0 (1 + eta))`` drives the conditional entropy of the
  output phase.

The outer expectation uses adaptive Gauss-Kronrod quadrature, the inner
entropies a composite Gauss-Legendre rule evaluated for all outer nodes at
once.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np

from . import distributions as dist
from .numerics import EstimateWithError, EstimatorConfig, derive_stream, integrate_1d
from .special_math import EULER_GAMMA, LOG2E, bessel_i0_scaled, f_lambda

LOG2_2PI = math.log2(2.0 * math.pi)
# h(|Y|) = 1/2 log2(es + n0) + H_AMP_CONST
H_AMP_CONST = (1.0 + 0.5 * EULER_GAMMA) * LOG2E - 1.0
# amplitude lower bound = 1/2 log2(1 + snr) + BOUND_CONST; phase upper bound uses -BOUND_CONST
BOUND_CONST = 0.5 * (1.0 + EULER_GAMMA) * LOG2E - 0.5 * math.log2(math.pi) - 1.0

# Outer integrals run over u = lam / snr in [0, _U_MAX]; exp(-45) ~ 3e-20.
_U_MAX = 45.0


@dataclass(frozen=True)
class PolarDecomposition:
    """Mutual information and its amplitude, phase and cross terms, in bits."""

    total: EstimateWithError
    amplitude: EstimateWithError
    phase: EstimateWithError
    cross: EstimateWithError
    cross_negative: bool = field(default=False)

    @property
    def closure_gap(self):
        return self.total.value - (self.amplitude.value + self.phase.value + self.cross.value)


def capacity(params):
    """AWGN capacity ``log2(1 + es/n0)``."""
    return math.log2(1.0 + params.snr)


def h_amp_out(params):
    """Differential entropy (bits) of the Rayleigh output amplitude."""
    return 0.5 * math.log2(params.es + params.n0) + H_AMP_CONST


def amp_lower_bound(params):
    return 0.5 * math.log2(1.0 + params.snr) + BOUND_CONST


def phase_upper_bound(params):
    return 0.5 * math.log2(1.0 + params.snr) - BOUND_CONST


# --- inner entropies -------------------------------------------------------

@lru_cache(maxsize=None)
def _reference_rule(n_panels, order, graded_levels=0, ratio=0.15):
    """Composite Gauss-Legendre nodes/weights on [0, 1].

    With ``graded_levels`` > 0 the first panel is split geometrically
    toward 0, which keeps ``t log t`` endpoint behaviour from costing accuracy.
    """
    edges = list(np.linspace(0.0, 1.0, n_panels + 1))
    if graded_levels:
        h = edges[1]
        inner = [h * ratio ** k for k in range(graded_levels, 0, -1)]
        edges = [0.0] + inner + edges[1:]
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def rice_entropy_unit(lam):
    """Entropy in bits of ``|a + W|``, ``W ~ CN(0, 1)``, ``a^2 = lam``.

    Vectorized over ``lam``. The entropy for noise variance ``n0`` is this
    value at ``lam = a^2/n0`` plus ``log2(n0)/2``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    a = np.sqrt(lam)
    mu = dist.rice_mean(a, 1.0)
    sd = np.sqrt(f_lambda(lam))
    lo = np.maximum(mu - 14.0 * sd, 0.0)
    hi = mu + 14.0 * sd
    ref_x, ref_w = _reference_rule(28, 12, graded_levels=14)
    t = lo[:, None] + (hi - lo)[:, None] * ref_x[None, :]
    w = (hi - lo)[:, None] * ref_w[None, :]
    logp = (np.log(2.0 * t) - (t - a[:, None]) ** 2
            + np.log(bessel_i0_scaled(2.0 * a[:, None] * t)))
    p = np.exp(logp)
    return -(w * p * logp).sum(axis=1) * LOG2E


def phase_entropy_from_shape(s):
    """Entropy in bits of the Gaussian-input phase posterior with shape ``s``.

    Vectorized over ``s``; the density is even in the angle so only
    ``[0, pi]`` is integrated.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    # the peak at 0 has width ~ 1/(sqrt(2) s); 16/s covers ~22 widths
    b = np.minimum(np.pi, 16.0 / np.maximum(s, 1e-300))
    ref_x, ref_w = _reference_rule(24, 12)
    th = b[:, None] * ref_x[None, :]
    w = b[:, None] * ref_w[None, :]
    logp = dist.phase_logpdf_from_shape(th, s[:, None])
    total = (w * np.exp(logp) * logp).sum(axis=1)
    tail = b < np.pi
    if tail.any():
        tx, tw = _reference_rule(8, 12)
        bt = b[tail]
        th2 = bt[:, None] + (np.pi - bt)[:, None] * tx[None, :]
        w2 = (np.pi - bt)[:, None] * tw[None, :]
        lp2 = dist.phase_logpdf_from_shape(th2, s[tail][:, None])
        total[tail] += (w2 * np.exp(lp2) * lp2).sum(axis=1)
    return -2.0 * total * LOG2E


def _exp_expectation(func, mean, tol):
    """``E[func(v)]`` for ``v ~ Exp(mean)``, as an integral over ``u = v / mean``."""
    def integrand(u):
        return np.exp(-u) * func(mean * u)

    # most structure sits at u ~ 1/mean when the mean is large
    brk = [p for p in (1.0 / mean, 10.0 / mean, 1.0, 5.0) if 0 < p < _U_MAX]
    return integrate_1d(integrand, 0.0, _U_MAX, tol=tol, breakpoints=brk)


# --- decomposition terms -----------------------------------------------------

def cond_amp_entropy(params, config=EstimatorConfig()):
    """``h(|Y| | |X|)`` in bits."""
    inner = _exp_expectation(rice_entropy_unit, params.snr, config.quad_tol)
    return inner + 0.5 * math.log2(params.n0)


def amp_term(params, config=EstimatorConfig()):
    """``I(|X|; Y) = h(|Y|) - h(|Y| | |X|)``."""
    inner = _exp_expectation(rice_entropy_unit, params.snr, config.quad_tol)
    value = 0.5 * math.log2(1.0 + params.snr) + H_AMP_CONST - inner
    return EstimateWithError(value, 0.0)


def cond_phase_entropy(params, config=EstimatorConfig()):
    """``h(angle Y | angle X, |Y|)`` in bits."""
    return _exp_expectation(lambda v: phase_entropy_from_shape(np.sqrt(v)),
                            params.snr, config.quad_tol)


def phase_term(params, config=EstimatorConfig()):
    """``I(angle X; Y) = log2(2 pi) - h(angle Y | angle X, |Y|)``."""
    return EstimateWithError(LOG2_2PI - cond_phase_entropy(params, config), 0.0)


def cross_term_by_identity(params, config=EstimatorConfig(), amp=None, phase=None):
    """Cross term as capacity minus the amplitude and phase terms.

    Small negative values are quadrature noise; they are returned as is.
    """
    amp = amp if amp is not None else amp_term(params, config)
    phase = phase if phase is not None else phase_term(params, config)
    value = capacity(params) - amp.value - phase.value
    return EstimateWithError(value, 0.0)


def cross_term_direct(params, config=EstimatorConfig(), labels=()):
    """Monte-Carlo estimate of ``I(|X|; angle X | Y)`` from the posterior densities.

    Averages ``log2 p(x_amp, x_ang | y) / (p(x_amp | y) p(x_ang | y))`` over
    ``config.mc_samples`` draws of ``(X, W)``.
    """
    n = config.mc_samples
    if n < 2:
        raise ValueError("cross_term_direct needs at least two samples")
    rng = derive_stream(config.seed, (0x6A55,) + tuple(labels))
    z = rng.standard_normal((4, n))
    x = math.sqrt(0.5 * params.es) * (z[0] + 1j * z[1])
    w = math.sqrt(0.5 * params.n0) * (z[2] + 1j * z[3])
    y = x + w
    xa, xp = np.abs(x), np.angle(x)
    ya, yp = np.abs(y), np.angle(y)
    joint = dist.posterior_joint_logpdf(xa, xp, ya, yp, params)
    amp = dist.posterior_amp_logpdf(xa, ya, params)
    phase = dist.phase_logpdf_from_shape(yp - xp, dist.phase_shape(ya, params))
    vals = (joint - amp - phase) * LOG2E
    return EstimateWithError(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)))


def decompose_gaussian(params, config=EstimatorConfig()):
    """All four terms for Gaussian input at one operating point."""
    total = EstimateWithError(capacity(params), 0.0)
    amp = amp_term(params, config)
    phase = phase_term(params, config)
    cross = cross_term_by_identity(params, config, amp=amp, phase=phase)
    negative = cross.value < 0
    if negative:
        warnings.warn(f"cross term {cross.value:.3g} < 0 at SNR {params.snr_db:.2f} dB "
                      "(quadrature error)", RuntimeWarning, stacklevel=2)
    return PolarDecomposition(total, amp, phase, cross, cross_negative=negative)
