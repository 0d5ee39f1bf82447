"""Multipath channel model, path loss and blockage durations."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from beamacq.arrays import ArrayGeometry, array_response
from beamacq.channel import (
    Channel,
    LinkGeometry,
    PathComponent,
    channel_matrix,
    dbm2watt,
    lin2db,
    path_loss_db,
    post_training_snr,
    sample_channel,
    sample_path_duration,
    thermal_noise_w,
)

G = ArrayGeometry("ULA", 2, 16)


def grid_angle(k, n=32):
    """Angle whose sin-space phase is the k-th point of an n-point DFT grid."""
    s = 2 * k / n
    s = s - 2 if s > 1 else s
    return float(np.arcsin(s))


def channel(gains, aoas, aods):
    return Channel.for_arrays([PathComponent(g, a, d) for g, a, d in zip(gains, aoas, aods)], G, G)


class TestChannelMatrix:
    def test_single_path_rank_and_norm(self):
        ch = channel([1.0], [0.3], [-0.7])
        H = channel_matrix(ch, G, G)
        assert ch.antenna_gain == pytest.approx(32.0)
        assert np.linalg.matrix_rank(H) == 1
        assert np.linalg.norm(H) == pytest.approx(ch.antenna_gain, rel=1e-12)

    def test_rank_bounded_by_paths(self, rng):
        ch = channel(rng.standard_normal(3) + 1j, rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
        assert np.linalg.matrix_rank(channel_matrix(ch, G, G), tol=1e-9) <= 3

    def test_orthogonal_paths_energy(self):
        g = np.array([0.8 - 0.2j, 0.3j])
        ch = channel(g, [grid_angle(1), grid_angle(7)], [grid_angle(3), grid_angle(20)])
        H = channel_matrix(ch, G, G)
        direct = sum(ch.antenna_gain * gi * np.outer(array_response(G, a), array_response(G, d).conj())
                     for gi, a, d in zip(g, [grid_angle(1), grid_angle(7)], [grid_angle(3), grid_angle(20)]))
        np.testing.assert_allclose(H, direct, atol=1e-12)
        assert np.linalg.norm(H) ** 2 == pytest.approx(ch.antenna_gain**2 * np.sum(np.abs(g) ** 2), rel=1e-9)

    def test_gain_recomputed_with_paths(self):
        ch = channel([1.0], [0.0], [0.0])
        ch2 = ch.with_paths(ch.paths * 4)
        assert ch2.antenna_gain == pytest.approx(16.0)

    def test_dimension_mismatch(self):
        ch = channel([1.0], [0.0], [0.0])
        with pytest.raises(ValueError):
            channel_matrix(ch, ArrayGeometry("ULA", 1, 16), G)

    def test_zero_gain_rejected(self):
        with pytest.raises(ValueError):
            PathComponent(0.0, 0.0, 0.0)

    @given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
    @settings(max_examples=25)
    def test_linear_in_gains(self, c):
        ch = channel([1.0, 0.5j], [0.2, -0.4], [0.1, 1.0])
        np.testing.assert_allclose(channel_matrix(ch.scaled(c), G, G), c * channel_matrix(ch, G, G), atol=1e-9)


class TestPostTrainingSnr:
    def test_perfect_alignment(self):
        ch = channel([1.0], [0.2], [-0.5])
        assert post_training_snr(ch, 0.2, -0.5, 0.1, 1e-3, G, G) == pytest.approx(0.1 * 32**2 / 1e-3, rel=1e-12)

    def test_orthogonal_beam(self):
        ch = channel([1.0], [grid_angle(2)], [0.0])
        peak = 32**2
        assert post_training_snr(ch, grid_angle(5), 0.0, 1.0, 1.0, G, G) < 1e-12 * peak

    def test_secondary_path_three_db(self):
        a = 10 ** (-np.array([0, 3, 5]) / 20)
        aoas = [grid_angle(0), grid_angle(3), grid_angle(6)]
        aods = [grid_angle(2), grid_angle(9), grid_angle(13)]
        ch = channel(a, aoas, aods)
        s1 = post_training_snr(ch, aoas[0], aods[0], 1.0, 1.0, G, G)
        s2 = post_training_snr(ch, aoas[1], aods[1], 1.0, 1.0, G, G)
        assert lin2db(s1) - lin2db(s2) == pytest.approx(3.0, abs=0.01)

    def test_zero_noise(self):
        with pytest.raises(ValueError):
            post_training_snr(channel([1.0], [0], [0]), 0, 0, 1.0, 0.0, G, G)

    @given(st.floats(0, 2 * np.pi))
    @settings(max_examples=20)
    def test_global_phase_invariance(self, phi):
        ch = channel([1.0, 0.4 - 0.3j], [0.2, -0.6], [0.1, 0.7])
        a = post_training_snr(ch, 0.25, 0.05, 1.0, 1.0, G, G)
        b = post_training_snr(ch.scaled(np.exp(1j * phi)), 0.25, 0.05, 1.0, 1.0, G, G)
        assert a == pytest.approx(b, rel=1e-9)

    def test_max_at_nearest_grid_point(self, rng):
        for _ in range(10):
            t1, t2 = rng.uniform(-1, 1, 2)
            ch = channel([1.0], [np.arcsin(t1)], [np.arcsin(t2)])
            grid = [grid_angle(k) for k in range(32)]
            snr = [post_training_snr(ch, g, np.arcsin(t2), 1.0, 1.0, G, G) for g in grid]
            k = np.argmin([abs(np.angle(np.exp(1j * np.pi * (np.sin(g) - t1)))) for g in grid])
            assert int(np.argmax(snr)) == k


class TestPathLoss:
    def test_reference(self):
        assert path_loss_db(1.0, True, 28e9) == pytest.approx(32.4 + 20 * np.log10(28), abs=1e-12)
        assert path_loss_db(1.0, True, 28e9) == pytest.approx(61.34, abs=0.01)

    def test_doubling(self):
        d = path_loss_db(200, True, 28e9) - path_loss_db(100, True, 28e9)
        assert d == pytest.approx(20 * np.log10(2), abs=1e-12)

    @given(st.floats(1, 1e4))
    def test_los_below_nlos(self, d):
        assert path_loss_db(d, True, 28e9) <= path_loss_db(d, False, 28e9)

    def test_clamp_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert path_loss_db(0.2, True, 28e9) == path_loss_db(1.0, True, 28e9)
        assert "clamped" in caplog.text

    def test_noise(self):
        # -174 + 10 log10(250e3) + 7 = -113.02 dBm
        assert lin2db(thermal_noise_w(250e3, 7.0) / 1e-3) == pytest.approx(-174 + 10 * np.log10(250e3) + 7)
        assert dbm2watt(30) == pytest.approx(1.0)


class TestSampleChannel:
    def link(self, los=True):
        return LinkGeometry(100.0, los, G, G, los_aoa=0.3, los_aod=-0.2)

    def test_los_first(self, rng):
        ch = sample_channel(self.link(), 3, rng)
        assert ch.paths[0].is_los and ch.paths[0].aoa == 0.3 and ch.paths[0].aod == -0.2
        assert ch.num_paths == 4 and not any(p.is_los for p in ch.paths[1:])

    def test_nlos_only(self, rng):
        ch = sample_channel(self.link(False), 3, rng)
        assert ch.num_paths == 3 and not any(p.is_los for p in ch.paths)

    def test_nlos_weaker(self, rng):
        ch = sample_channel(self.link(), 3, rng)
        los = abs(ch.paths[0].gain)
        assert all(abs(p.gain) < los for p in ch.paths[1:])

    def test_deterministic(self):
        a = sample_channel(self.link(), 3, np.random.default_rng(5))
        b = sample_channel(self.link(), 3, np.random.default_rng(5))
        assert a == b

    def test_needs_nlos_paths(self, rng):
        with pytest.raises(ValueError):
            sample_channel(self.link(), 0, rng)

    def test_uniform_aoa(self):
        rng = np.random.default_rng(0)
        aoas = np.array([p.aoa for _ in range(2500) for p in sample_channel(self.link(False), 4, rng).paths])
        counts, _ = np.histogram(aoas, bins=20, range=(0, 2 * np.pi))
        assert aoas.size == 10_000
        assert stats.chisquare(counts).pvalue > 0.01


class TestPathDuration:
    def test_mean(self):
        x = sample_path_duration(100.0, np.random.default_rng(0), 100_000)
        assert np.mean(x) == pytest.approx(0.01, rel=0.02)
        assert np.all(x >= 0)

    def test_survival(self):
        x = sample_path_duration(100.0, np.random.default_rng(1), 100_000)
        assert np.mean(x > 0.01) == pytest.approx(np.exp(-1), abs=0.02)

    @pytest.mark.parametrize("rate", [0.0, -1.0])
    def test_invalid(self, rate, rng):
        with pytest.raises(ValueError):
            sample_path_duration(rate, rng)
