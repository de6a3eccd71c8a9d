import csv
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from polarmi.constellation import (Constellation, is_square_qam, make_apsk, make_pam_factor,
                                   make_product_apsk, make_psk, make_square_qam, split_m, validate)


def mp_radius(q, m_amp):
    return float(mpmath.sqrt(-mpmath.log(1 - (q + mpmath.mpf(1) / 2) / 2 ** m_amp)))


class TestSplit:
    @pytest.mark.parametrize("m,expected", [(6, (4, 2)), (8, (5, 3)), (5, (3, 2)), (2, (2, 0)), (3, (2, 1))])
    def test_examples(self, m, expected):
        assert split_m(m) == expected

    @given(st.integers(min_value=2, max_value=40))
    def test_sums_to_m(self, m):
        mp, ma = split_m(m)
        assert mp + ma == m and mp >= ma >= 0

    @pytest.mark.parametrize("m", [1, 0, -3, 2.5])
    def test_invalid(self, m):
        with pytest.raises(ValueError):
            split_m(m)


class TestProductApsk:
    def test_64apsk_radii_and_energy(self):
        c = make_product_apsk(6)
        expected = [mp_radius(q, 2) for q in range(4)]
        np.testing.assert_allclose(c.amp_levels, expected, rtol=1e-14)
        np.testing.assert_allclose(c.amp_levels, [0.365419, 0.685568, 0.990368, 1.442027], atol=5e-7)
        assert c.es == pytest.approx(0.915951, abs=5e-7)
        assert (c.size, c.m_amp, c.m_phase) == (64, 2, 4)

    def test_phases(self):
        c = make_product_apsk(6)
        phi = np.sort(np.mod(np.pi * (2 * np.arange(16) + 1) / 16 + np.pi, 2 * np.pi) - np.pi)
        np.testing.assert_allclose(c.phase_levels, phi, atol=1e-12)
        assert np.all((c.phase_levels >= -np.pi) & (c.phase_levels < np.pi))

    def test_qpsk_case(self):
        c = make_product_apsk(2)
        assert c.size == 4 and len(c.amp_levels) == 1
        assert c.amp_levels[0] == pytest.approx(math.sqrt(math.log(2)), rel=1e-14)

    def test_256apsk(self):
        c = make_product_apsk(8)
        rep = validate(c)
        assert rep.ok
        assert (c.m_amp, c.m_phase) == (3, 5)

    def test_energy_tends_to_one(self):
        assert abs(make_apsk(8, 1).es - 1) < 0.02

    @given(st.integers(min_value=2, max_value=10))
    def test_product_structure(self, m):
        c = make_product_apsk(m)
        assert c.is_polar and c.is_ring_major
        assert np.all(np.diff(c.amp_levels) > 0)
        assert len(c.amp_levels) * len(c.phase_levels) == c.size == 2 ** m
        # every (ring, phase) pair occurs exactly once: uniform joint = product of marginals
        counts = np.zeros((len(c.amp_levels), len(c.phase_levels)), dtype=int)
        np.add.at(counts, (c.amp_index, c.phase_index), 1)
        assert np.all(counts == 1)
        assert c.es == pytest.approx(np.mean(c.amp_levels ** 2), rel=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            make_product_apsk(1)


class TestQam:
    def test_qpsk(self):
        c = make_square_qam(2)
        expected = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2)
        assert np.allclose(np.sort_complex(c.points), np.sort_complex(expected))
        assert c.es == pytest.approx(1.0)
        assert c.is_polar

    @pytest.mark.parametrize("m,power", [(4, 10), (6, 42)])
    def test_scaling(self, m, power):
        c = make_square_qam(m)
        assert c.es == pytest.approx(1.0, abs=1e-14)
        assert np.min(np.abs(c.points.real)) == pytest.approx(1 / math.sqrt(power), rel=1e-14)
        assert not c.is_polar and len(c.phase_levels) == 0

    def test_odd_rejected(self):
        with pytest.raises(ValueError):
            make_square_qam(5)

    def test_pam_factor(self):
        pam = make_pam_factor(make_square_qam(6))
        assert pam.size == 8 and pam.es == pytest.approx(0.5, abs=1e-14)
        pam4 = make_pam_factor(make_square_qam(4))
        np.testing.assert_allclose(np.sort(pam4.points.real), np.array([-3, -1, 1, 3]) / math.sqrt(10), rtol=1e-14)
        pam2 = make_pam_factor(make_square_qam(2))
        np.testing.assert_allclose(np.sort(pam2.points.real), [-1 / math.sqrt(2), 1 / math.sqrt(2)])
        assert is_square_qam(make_square_qam(4))
        with pytest.raises(ValueError):
            make_pam_factor(make_product_apsk(6))


class TestPskAndValidation:
    def test_psk(self):
        c = make_psk(3)
        assert c.size == 8 and c.m_amp == 0 and c.m_phase == 3
        assert np.allclose(np.abs(c.points), c.amp_levels[0])

    def test_duplicate_fails(self):
        rep = validate(Constellation([1, 1j, -1, 1]))
        assert not rep.ok and not rep.checks["no_duplicates"]

    def test_size_not_power_of_two(self):
        assert not validate(Constellation([1, 1j, -1])).ok

    def test_immutable(self):
        c = make_product_apsk(4)
        with pytest.raises(ValueError):
            c.points[0] = 0
        with pytest.raises(Exception):
            c.es = 2.0

    def test_snr_to_n0(self):
        c = make_product_apsk(6)
        assert c.snr_to_n0(10.0) == pytest.approx(c.es / 10.0)

    def test_csv_export(self, tmp_path):
        c = make_product_apsk(4)
        path = tmp_path / "c.csv"
        c.to_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["index", "re", "im", "amp", "phase"]
        assert len(rows) == 17
        pts = np.array([float(r[1]) + 1j * float(r[2]) for r in rows[1:]])
        np.testing.assert_allclose(pts, c.points, atol=1e-11)
