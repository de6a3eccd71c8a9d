"""Signal sets: product-APSK, PSK, square QAM and the PAM factor of a QAM.

Polar-factorable sets store their points ring-major, so
``points.reshape(n_amp, n_phase)`` lays rings along rows and phases along
columns.
"""

import csv
from dataclasses import dataclass, field
import math

import numpy as np

_ATOL = 1e-9


def _wrap_phase(phi):
    """Map angles into [-pi, pi)."""
    return (np.asarray(phi) + np.pi) % (2.0 * np.pi) - np.pi


def _unique_sorted(values, atol=_ATOL):
    vals = np.sort(np.asarray(values, dtype=float))
    keep = np.concatenate([[True], np.diff(vals) > atol])
    return vals[keep]


def _nearest_index(levels, values, atol=_ATOL):
    idx = np.searchsorted(levels, values - atol)
    idx = np.clip(idx, 0, len(levels) - 1)
    if np.any(np.abs(levels[idx] - values) > atol):
        return None
    return idx


def _bits(n):
    if n < 1:
        return None
    b = int(round(math.log2(n)))
    return b if 2 ** b == n else None


@dataclass(frozen=True, eq=False)
class Constellation:
    """Finite complex signal set with uniform priors.

    ``amp_index``/``phase_index`` give each point's position in
    ``amp_levels``/``phase_levels``; both are ``None`` and ``phase_levels``
    is empty when the set is not a full amplitude x phase product.
    """

    points: np.ndarray
    name: str = ""
    amp_levels: np.ndarray = field(init=False)
    phase_levels: np.ndarray = field(init=False)
    amp_index: np.ndarray = field(init=False, default=None)
    phase_index: np.ndarray = field(init=False, default=None)
    m: int = field(init=False)
    m_amp: int = field(init=False, default=None)
    m_phase: int = field(init=False, default=None)
    es: float = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).ravel()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        m = _bits(len(pts))
        object.__setattr__(self, "m", m if m is not None else math.log2(max(len(pts), 1)))
        object.__setattr__(self, "es", float(np.mean(np.abs(pts) ** 2)) if len(pts) else 0.0)
        amps = np.abs(pts)
        object.__setattr__(self, "amp_levels", _unique_sorted(amps))
        factor = _polar_factor(pts)
        if factor is None:
            object.__setattr__(self, "phase_levels", np.empty(0))
            return
        phases, a_idx, p_idx = factor
        object.__setattr__(self, "phase_levels", phases)
        object.__setattr__(self, "amp_index", a_idx)
        object.__setattr__(self, "phase_index", p_idx)
        object.__setattr__(self, "m_amp", _bits(len(self.amp_levels)))
        object.__setattr__(self, "m_phase", _bits(len(phases)))

    @property
    def size(self):
        return len(self.points)

    @property
    def is_polar(self):
        return self.amp_index is not None

    @property
    def is_ring_major(self):
        """True when points are stored as a ``(n_amp, n_phase)`` grid."""
        if not self.is_polar:
            return False
        n_a, n_p = len(self.amp_levels), len(self.phase_levels)
        grid = np.arange(self.size)
        return (np.array_equal(self.amp_index, grid // n_p)
                and np.array_equal(self.phase_index, grid % n_p)
                and n_a * n_p == self.size)

    def snr_to_n0(self, snr_db):
        """Noise variance giving ``10 log10(es / n0) = snr_db``."""
        return self.es / 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)

    def to_csv(self, path):
        """Write ``index,re,im,amp,phase`` rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "re", "im", "amp", "phase"])
            for i, p in enumerate(self.points):
                writer.writerow([i, f"{p.real:.12g}", f"{p.imag:.12g}",
                                 f"{abs(p):.12g}", f"{float(_wrap_phase(np.angle(p))):.12g}"])


def _polar_factor(pts):
    """Return ``(phase_levels, amp_index, phase_index)`` or ``None``."""
    if len(pts) == 0:
        return None
    amps = np.abs(pts)
    if np.any(amps <= _ATOL):
        return None
    levels = _unique_sorted(amps)
    phases = _wrap_phase(np.angle(pts))
    # points at angle ~pi may land at either end of the wrap; fold them to -pi
    phases = np.where(phases > np.pi - _ATOL, phases - 2 * np.pi, phases)
    phase_levels = _unique_sorted(phases)
    if len(levels) * len(phase_levels) != len(pts):
        return None
    a_idx = _nearest_index(levels, amps)
    p_idx = _nearest_index(phase_levels, phases)
    if a_idx is None or p_idx is None:
        return None
    flat = a_idx * len(phase_levels) + p_idx
    if len(np.unique(flat)) != len(pts):
        return None
    return phase_levels, a_idx, p_idx


def split_m(m):
    """Split ``m`` bits into ``(m_phase, m_amp)`` for product-APSK.

    Even ``m`` gives ``(m/2 + 1, m/2 - 1)``, odd ``m`` gives
    ``((m+1)/2, (m-1)/2)``.  ``m = 2`` is QPSK: four phases, one ring.
    """
    if int(m) != m or m < 2:
        raise ValueError("m must be an integer >= 2")
    m = int(m)
    if m % 2 == 0:
        return m // 2 + 1, m // 2 - 1
    return (m + 1) // 2, (m - 1) // 2


def apsk_radii(m_amp):
    """Gaussian-quantile ring radii ``sqrt(-ln(1 - (q + 1/2) 2^-m_amp))``."""
    n = 2 ** m_amp
    q = np.arange(n)
    return np.sqrt(-np.log1p(-(q + 0.5) / n))


def make_apsk(m_amp, m_phase, name=None):
    """Product-APSK with ``2**m_amp`` rings of ``2**m_phase`` points each.

    Phases are ``pi (2p + 1) / 2**m_phase``; energy is left as the radii give it.
    """
    if m_amp < 0 or m_phase < 0 or m_amp + m_phase < 1:
        raise ValueError("need m_amp >= 0, m_phase >= 0 and at least one bit")
    n_phase = 2 ** m_phase
    radii = apsk_radii(m_amp)
    phi = _wrap_phase(np.pi * (2 * np.arange(n_phase) + 1) / n_phase)
    phi = np.sort(phi)
    points = (radii[:, None] * np.exp(1j * phi[None, :])).ravel()
    label = name or f"product-{2 ** (m_amp + m_phase)}APSK({2 ** m_phase}x{2 ** m_amp})"
    return Constellation(points, name=label)


def make_product_apsk(m):
    """Product-APSK of order ``2**m`` with the standard bit split."""
    m_phase, m_amp = split_m(m)
    return make_apsk(m_amp, m_phase, name=f"product-{2 ** m}APSK")


def make_psk(m):
    """``2**m``-PSK, i.e. a single-ring product-APSK."""
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    return make_apsk(0, int(m), name=f"{2 ** int(m)}PSK")


def _pam_levels(bits):
    n = 2 ** bits
    return np.arange(-(n - 1), n, 2, dtype=float)


def make_square_qam(m):
    """Square ``2**m``-QAM on odd-integer coordinates, scaled to unit energy."""
    if int(m) != m or m < 2 or m % 2:
        raise ValueError("square QAM needs an even m >= 2")
    levels = _pam_levels(int(m) // 2)
    grid = (levels[:, None] + 1j * levels[None, :]).ravel()
    scale = math.sqrt(np.mean(np.abs(grid) ** 2))
    return Constellation(grid / scale, name=f"{2 ** int(m)}QAM")


def _square_side(qam):
    side = int(round(math.sqrt(qam.size)))
    if side * side != qam.size or side < 2:
        raise ValueError("not a square constellation")
    re = _unique_sorted(qam.points.real)
    im = _unique_sorted(qam.points.imag)
    if len(re) != side or len(im) != side or not np.allclose(re, im, atol=_ATOL):
        raise ValueError("not a square QAM grid")
    grid = (re[:, None] + 1j * im[None, :]).ravel()
    have = np.sort_complex(np.round(qam.points, 9))
    if not np.allclose(have, np.sort_complex(np.round(grid, 9)), atol=1e-8):
        raise ValueError("not a square QAM grid")
    return re


def make_pam_factor(qam):
    """Real-axis PAM factor of a square QAM (energy ``qam.es / 2``)."""
    levels = _square_side(qam)
    return Constellation(levels.astype(complex), name=f"{len(levels)}PAM")


def is_square_qam(constellation):
    try:
        _square_side(constellation)
    except ValueError:
        return False
    return True


@dataclass
class ValidationReport:
    ok: bool
    checks: dict

    def __bool__(self):
        return self.ok


def validate(constellation):
    """Check the structural invariants; never raises."""
    c = constellation
    pts = c.points
    checks = {}
    checks["power_of_two"] = _bits(len(pts)) is not None
    rounded = np.round(pts, 9)
    checks["no_duplicates"] = len(np.unique(rounded)) == len(pts)
    checks["energy"] = bool(np.isclose(c.es, np.mean(np.abs(pts) ** 2)))
    if c.is_polar:
        n_a, n_p = len(c.amp_levels), len(c.phase_levels)
        checks["product_structure"] = n_a * n_p == len(pts)
        checks["amp_levels_power_of_two"] = c.m_amp is not None
        checks["phase_levels_power_of_two"] = c.m_phase is not None
        if c.m_amp is not None and c.m_phase is not None:
            checks["bit_split"] = c.m_amp + c.m_phase == c.m
        checks["ring_energy"] = bool(np.isclose(c.es, np.mean(c.amp_levels ** 2)))
    ok = all(checks.values())
    return ValidationReport(ok, checks)
