"""Mutual information and its polar decomposition for finite constellations.

All terms at one operating point are computed from one pass over shared
noise realizations (Gauss-Hermite nodes or Monte-Carlo draws), so the
closure ``ami = amp + phase + cross`` holds up to the expectation error
of the shared rule.

Symbols related by a rotation that maps the constellation onto itself have
identical expectations under circularly symmetric noise, so only one
representative per rotation orbit is evaluated.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constellation import make_pam_factor
from .gaussian_polar import PolarDecomposition
from .numerics import (EstimateWithError, EstimatorConfig, complex_gauss_hermite,
                       complex_gaussian_samples, derive_stream, _hermgauss)
from .special_math import LOG2E, bessel_i0_scaled, log_sum_exp

_CHUNK = 1 << 21  # max (noise node x constellation point) entries per block


@dataclass(frozen=True)
class SymbolPosterior:
    """Posterior over constellation points for one received value."""

    log_weights: np.ndarray
    log_norm: float

    @property
    def weights(self):
        return np.exp(self.log_weights)


def symbol_posterior(constellation, y, n0):
    """``P(x | y)`` for uniform priors, kept in the log domain."""
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    logits = -np.abs(complex(y) - constellation.points) ** 2 / n0
    # shift first: logits far from zero would lose digits in ``logits - norm``
    top = float(logits.max())
    shifted = logits - top
    rel = log_sum_exp(shifted)
    return SymbolPosterior(shifted - rel, top + rel)


# --- symmetry ---------------------------------------------------------------

def _rotation_fold(points):
    """Largest k in a small candidate set with the set invariant under rotation by 2 pi/k."""
    key = np.sort_complex(np.round(points, 9))
    best = 1
    candidates = {2, 4}
    n = len(points)
    k = 2
    while k <= n:
        candidates.add(k)
        k *= 2
    for k in sorted(candidates):
        rot = np.sort_complex(np.round(points * np.exp(2j * np.pi / k), 9))
        if np.allclose(rot, key, atol=1e-8):
            best = k
    return best


def _orbit_representatives(points):
    """Indices of one point per rotation orbit, with orbit weights summing to one."""
    k = _rotation_fold(points)
    n = len(points)
    if k == 1:
        return np.arange(n), np.full(n, 1.0 / n)
    taken = np.zeros(n, dtype=bool)
    reps, sizes = [], []
    rot = np.exp(2j * np.pi / k)
    for i in range(n):
        if taken[i]:
            continue
        orbit = 0
        p = points[i]
        for _ in range(k):
            j = int(np.argmin(np.abs(points - p)))
            if not taken[j]:
                taken[j] = True
                orbit += 1
            p = p * rot
        reps.append(i)
        sizes.append(orbit)
    sizes = np.array(sizes, dtype=float)
    return np.array(reps), sizes / sizes.sum()


# --- shared evaluation -------------------------------------------------------

def _noise_rule(n0, config, labels, rep):
    if config.mode == "gh":
        w, weights = complex_gauss_hermite(n0, config.gh_nodes)
        return w, weights
    w = complex_gaussian_samples(n0, config.mc_samples, derive_stream(config.seed, tuple(labels) + (rep,)))
    return w, None


def _ring_major(constellation):
    """Constellation points permuted into ring-major order, plus grid shape."""
    c = constellation
    n_a, n_p = len(c.amp_levels), len(c.phase_levels)
    order = np.argsort(c.amp_index * n_p + c.phase_index, kind="stable")
    return c.points[order], c.amp_index[order], c.phase_index[order], n_a, n_p


def _per_node_terms(x, q, p, pts, n_a, n_p, radii, w, n0, polar):
    """Per-noise-node log2 ratios for transmitted point ``x`` (ring ``q``, phase ``p``)."""
    d = x - pts
    d2 = (d.real ** 2 + d.imag ** 2)[None, :]
    logits = -(d2 + 2.0 * (w.real[:, None] * d.real[None, :]
                           + w.imag[:, None] * d.imag[None, :])) / n0
    lse_all = log_sum_exp(logits, axis=1)
    out = {"ami": lse_all * LOG2E}
    if not polar:
        return out
    grid = logits.reshape(-1, n_a, n_p)
    lse_ring = log_sum_exp(grid, axis=2)
    lse_phase = log_sum_exp(grid, axis=1)
    out["amp"] = (lse_all - lse_ring[:, q]) * LOG2E
    out["phase"] = (lse_all - lse_phase[:, p]) * LOG2E

    log_post = grid - lse_all[:, None, None]
    log_pa = lse_ring - lse_all[:, None]
    log_pp = lse_phase - lse_all[:, None]
    h_x = -(np.exp(log_post) * log_post).sum(axis=(1, 2))
    h_a = -(np.exp(log_pa) * log_pa).sum(axis=1)
    h_p = -(np.exp(log_pp) * log_pp).sum(axis=1)
    out["cross"] = (h_a + h_p - h_x) * LOG2E

    # amplitude information carried by |y| alone: Rice likelihoods of the rings
    ya = np.abs(x + w)[:, None]
    ll = -(radii[None, :] - ya) ** 2 / n0 + np.log(bessel_i0_scaled(2.0 * radii[None, :] * ya / n0))
    out["amp_out"] = (log_sum_exp(ll, axis=1) - ll[:, q]) * LOG2E
    return out


def _estimate_all(constellation, n0, config, labels=(), polar=None):
    """Dictionary of expectations of every per-node quantity, as EstimateWithError.

    ``polar=False`` computes the AMI only, even for factorable sets.
    """
    if not n0 > 0 or not math.isfinite(n0):
        raise ValueError("n0 must be positive and finite")
    c = constellation
    polar = c.is_polar if polar is None else (polar and c.is_polar)
    if polar:
        pts, a_idx, p_idx, n_a, n_p = _ring_major(c)
        radii = c.amp_levels
    else:
        pts, a_idx, p_idx, n_a, n_p, radii = c.points, None, None, 1, c.size, None
    reps, rep_w = _orbit_representatives(pts)

    sums = {}
    var_terms = {}
    for r, (i, wt) in enumerate(zip(reps, rep_w)):
        w, weights = _noise_rule(n0, config, labels, r)
        q = a_idx[i] if polar else None
        p = p_idx[i] if polar else None
        step = max(1, _CHUNK // max(len(pts), 1))
        parts = {}
        for start in range(0, len(w), step):
            vals = _per_node_terms(pts[i], q, p, pts, n_a, n_p, radii, w[start:start + step], n0, polar)
            for key, v in vals.items():
                parts.setdefault(key, []).append(v)
        per_node = {key: np.concatenate(v) for key, v in parts.items()}
        if polar:
            per_node["leak"] = per_node["amp"] - per_node["amp_out"]
        for key, v in per_node.items():
            if weights is not None:
                mean, var = float(weights @ v), 0.0
            else:
                mean = float(v.mean())
                var = float(v.var(ddof=1) / v.size) if v.size > 1 else 0.0
            sums[key] = sums.get(key, 0.0) + wt * mean
            var_terms[key] = var_terms.get(key, 0.0) + wt * wt * var

    m = math.log2(c.size)
    res = {"ami": EstimateWithError(m - sums["ami"], math.sqrt(var_terms["ami"]))}
    if polar:
        m_amp = math.log2(n_a)
        m_phase = math.log2(n_p)
        res["amp"] = EstimateWithError(m_amp - sums["amp"], math.sqrt(var_terms["amp"]))
        res["phase"] = EstimateWithError(m_phase - sums["phase"], math.sqrt(var_terms["phase"]))
        res["cross"] = EstimateWithError(sums["cross"], math.sqrt(var_terms["cross"]))
        res["amp_out"] = EstimateWithError(m_amp - sums["amp_out"], math.sqrt(var_terms["amp_out"]))
        # I(X_amp; Y) - I(X_amp; |Y|), from paired per-node differences
        res["leak"] = EstimateWithError(-sums["leak"], math.sqrt(var_terms["leak"]))
    return res


def _require_polar(constellation):
    if not constellation.is_polar:
        raise ValueError(f"{constellation.name or 'constellation'} is not amplitude x phase factorable")


# --- public estimators --------------------------------------------------------

def ami(constellation, n0, config=EstimatorConfig(), labels=()):
    """Average mutual information ``I(X;Y)`` in bits for uniform inputs."""
    return _estimate_all(constellation, n0, config, labels, polar=False)["ami"]


def amp_term_discrete(constellation, n0, config=EstimatorConfig(), labels=()):
    """``I(X_amp; Y)``, in ``[0, m_amp]``."""
    _require_polar(constellation)
    return _estimate_all(constellation, n0, config, labels)["amp"]


def phase_term_discrete(constellation, n0, config=EstimatorConfig(), labels=()):
    """``I(X_phase; Y)``, in ``[0, m_phase]``."""
    _require_polar(constellation)
    return _estimate_all(constellation, n0, config, labels)["phase"]


def cross_term_discrete(constellation, n0, config=EstimatorConfig(), labels=()):
    """``I(X_amp; X_phase | Y)`` from posterior marginals."""
    _require_polar(constellation)
    return _estimate_all(constellation, n0, config, labels)["cross"]


def amp_output_only(constellation, n0, config=EstimatorConfig(), labels=()):
    """``I(X_amp; |Y|)``: amplitude information left after discarding the output phase."""
    _require_polar(constellation)
    return _estimate_all(constellation, n0, config, labels)["amp_out"]


def amp_leakage(constellation, n0, config=EstimatorConfig(), labels=()):
    """``I(X_amp; Y) - I(X_amp; |Y|) = I(X_amp; angle Y | |Y|)``."""
    _require_polar(constellation)
    return _estimate_all(constellation, n0, config, labels)["leak"]


@dataclass(frozen=True)
class DiscreteDecomposition(PolarDecomposition):
    amp_output_only: EstimateWithError = None
    leakage: EstimateWithError = None


def decompose_discrete(constellation, n0, config=EstimatorConfig(), labels=()):
    """Every term at one operating point from a single shared pass.

    Non-factorable constellations get only ``total``; the other fields are
    ``None``.
    """
    res = _estimate_all(constellation, n0, config, labels)
    if not constellation.is_polar:
        return DiscreteDecomposition(res["ami"], None, None, None)
    return DiscreteDecomposition(res["ami"], res["amp"], res["phase"], res["cross"],
                                 cross_negative=res["cross"].value < 0,
                                 amp_output_only=res["amp_out"], leakage=res["leak"])


# --- one-dimensional channels -------------------------------------------------

def ami_real(constellation, n0, config=EstimatorConfig(), labels=()):
    """AMI of a real constellation over real AWGN with variance ``n0/2``."""
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    pts = constellation.points.real
    if np.any(np.abs(constellation.points.imag) > 1e-12):
        raise ValueError("ami_real needs a real-valued constellation")
    total, var = 0.0, 0.0
    for i, x in enumerate(pts):
        if config.mode == "gh":
            t, wt = _hermgauss(config.gh_nodes)
            w, weights = math.sqrt(n0) * t, wt / math.sqrt(math.pi)
        else:
            rng = derive_stream(config.seed, tuple(labels) + (0x1D, i))
            w, weights = math.sqrt(0.5 * n0) * rng.standard_normal(config.mc_samples), None
        d = x - pts
        logits = -(d[None, :] ** 2 + 2.0 * w[:, None] * d[None, :]) / n0
        v = log_sum_exp(logits, axis=1) * LOG2E
        if weights is not None:
            total += float(weights @ v)
        else:
            total += float(v.mean())
            var += float(v.var(ddof=1) / v.size)
    n = len(pts)
    return EstimateWithError(math.log2(n) - total / n, math.sqrt(var) / n)


def iq_additivity_check(qam, n0, config=EstimatorConfig(), labels=()):
    """``(I(X;Y) of the QAM, I(X_I;Y_I) + I(X_Q;Y_Q))`` at the same ``n0``."""
    pam = make_pam_factor(qam)
    two_d = ami(qam, n0, config, labels)
    one_d = ami_real(pam, n0, config, labels)
    return two_d, EstimateWithError(2.0 * one_d.value, 2.0 * one_d.std_error)
