"""Quadrature and Monte-Carlo machinery shared by the estimators."""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

# Gauss-Kronrod 21-point abscissae (positive half) and weights, as in QUADPACK qk21.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077929162184069,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
# 10-point Gauss weights, attached to _XGK[1], _XGK[3], ..., _XGK[9].
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[1:10:2] = _WG
GAUSS_WEIGHTS[11:20:2] = _WG[::-1]


class IntegrationError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error={error:.3g})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs for every estimator in the package.

    ``mc_samples`` is per constellation symbol (or the total for the
    Gaussian-input cross term); ``gh_nodes`` per real dimension.
    """

    mc_samples: int = 200_000
    gh_nodes: int = 32
    quad_tol: float = 1e-8
    seed: int = 0
    mode: str = "gh"

    def __post_init__(self):
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if self.gh_nodes < 2:
            raise ValueError("gh_nodes must be >= 2")
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be positive")
        if self.mode not in ("gh", "mc"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.std_error) or self.std_error < 0:
            raise ValueError("std_error must be finite and nonnegative")

    def __float__(self):
        return float(self.value)


def _finite_interval(f, a, b):
    """Return (g, a, b) mapping a semi-infinite range onto a finite one."""
    if math.isinf(b):
        # x = a + t / (1 - t), t in [0, 1)
        def g(t):
            one_minus = 1.0 - t
            return f(a + t / one_minus) / (one_minus * one_minus)
        return g, 0.0, 1.0
    return f, a, b


def integrate_1d(f, a, b, tol=1e-8, max_intervals=2000, breakpoints=()):
    """Adaptive Gauss-Kronrod (G10/K21) quadrature of a vectorized integrand.

    Parameters
    ----------
    f : callable
        Takes a 1-D array of abscissae, returns values of the same shape.
    a, b : float
        Limits; ``b`` may be ``inf``.
    tol : float
        Absolute error target for the whole integral.
    breakpoints : sequence of float
        Extra initial subdivision points inside ``(a, b)``.

    Raises
    ------
    IntegrationError
        If ``max_intervals`` subintervals cannot reach ``tol``.
    """
    if not b >= a:
        raise ValueError("need a <= b")
    if a == b:
        return 0.0
    g, lo, hi = _finite_interval(f, a, b)
    if math.isinf(b):
        pts = [lo] + [(p - a) / (1.0 + p - a) for p in sorted(breakpoints) if a < p] + [hi]
    else:
        pts = [lo] + [p for p in sorted(breakpoints) if a < p < b] + [hi]
    left = np.array(pts[:-1], dtype=float)
    right = np.array(pts[1:], dtype=float)
    kron, err = _gk21(g, left, right)
    while True:
        total_err = err.sum()
        if total_err <= tol:
            return float(kron.sum())
        if len(left) >= max_intervals:
            raise IntegrationError("interval budget exhausted", float(kron.sum()), float(total_err))
        # Bisect the fewest worst intervals whose removal would bring the
        # remaining error under tol / 2.
        order = np.argsort(-err)
        remaining = total_err - np.cumsum(err[order])
        count = int(np.searchsorted(-remaining, -0.5 * tol)) + 1
        split = order[:count]
        keep = np.ones(len(left), dtype=bool)
        keep[split] = False
        mid = 0.5 * (left[split] + right[split])
        new_left = np.concatenate([left[split], mid])
        new_right = np.concatenate([mid, right[split]])
        if np.any(new_right <= new_left):
            raise IntegrationError("subinterval underflow", float(kron.sum()), float(total_err))
        k_new, e_new = _gk21(g, new_left, new_right)
        left = np.concatenate([left[keep], new_left])
        right = np.concatenate([right[keep], new_right])
        kron = np.concatenate([kron[keep], k_new])
        err = np.concatenate([err[keep], e_new])


def _gk21(g, left, right):
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
    fx = np.asarray(g(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise IntegrationError("integrand returned non-finite values", float("nan"), float("inf"))
    kron = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss)


@lru_cache(maxsize=32)
def _hermgauss(n):
    nodes, weights = np.polynomial.hermite.hermgauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def complex_gauss_hermite(n0, n_nodes):
    """Tensor Gauss-Hermite rule for ``w ~ CN(0, n0)``.

    Returns ``(w, weights)`` with ``n_nodes**2`` complex nodes and weights
    summing to one, so ``sum(weights * g(w))`` approximates ``E[g(w)]``.
    """
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    x, wx = _hermgauss(n_nodes)
    # per real dimension the variance is n0/2; hermgauss integrates against exp(-t^2)
    scale = math.sqrt(n0)
    w = scale * (x[:, None] + 1j * x[None, :]).ravel()
    weights = (wx[:, None] * wx[None, :]).ravel() / math.pi
    return w, weights


def complex_gaussian_samples(n0, n_samples, stream):
    """``n_samples`` draws of ``CN(0, n0)`` from ``stream``."""
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    z = stream.standard_normal((2, n_samples))
    return math.sqrt(0.5 * n0) * (z[0] + 1j * z[1])


def derive_stream(seed, labels=()):
    """Deterministic random stream keyed by ``(seed, labels)``.

    Uses a Philox counter-based bit generator whose key comes from a
    ``SeedSequence`` with ``labels`` as the spawn key, so every label tuple
    gets its own independent stream no matter which thread asks first.
    """
    seq = np.random.SeedSequence(int(seed) & ((1 << 64) - 1),
                                 spawn_key=tuple(int(v) for v in labels))
    return np.random.Generator(np.random.Philox(seq))


def expect_complex_gaussian(g, n0, config, mode=None, labels=()):
    """``E[g(w)]`` for circularly symmetric ``w ~ CN(0, n0)``.

    ``mode`` defaults to ``config.mode``. Gauss-Hermite results carry zero
    standard error; Monte-Carlo results carry ``std/sqrt(n)``.
    """
    mode = mode or config.mode
    if mode == "gh":
        w, weights = complex_gauss_hermite(n0, config.gh_nodes)
        vals = np.broadcast_to(np.asarray(g(w), dtype=float), w.shape)
        return EstimateWithError(float(weights @ vals), 0.0)
    if mode == "mc":
        w = complex_gaussian_samples(n0, config.mc_samples, derive_stream(config.seed, labels))
        vals = np.asarray(g(w), dtype=float)
        if vals.ndim == 0:
            vals = np.full(w.shape, float(vals))
        se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        return EstimateWithError(float(vals.mean()), se)
    raise ValueError(f"unknown mode {mode!r}")
