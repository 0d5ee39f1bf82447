"""Array geometry, responses and the FFT search grid."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamacq.arrays import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Beam,
    array_response,
    dft_grid_phases,
    dft_vector,
    grid_phases,
    grid_responses,
    grid_transform,
    response_from_phases,
    steering_beam,
)

angles = st.floats(-np.pi, np.pi, allow_nan=False)


class TestDftVector:
    def test_zero_phase(self):
        np.testing.assert_allclose(dft_vector(0.0, 4), np.full(4, 0.5))

    def test_half_turn(self):
        np.testing.assert_allclose(dft_vector(np.pi, 2), np.array([1, -1]) / np.sqrt(2), atol=1e-15)

    def test_rejects_zero_length(self):
        with pytest.raises(ValueError):
            dft_vector(0.3, 0)

    @given(st.floats(-50, 50), st.integers(1, 64))
    def test_unit_norm(self, phase, n):
        assert abs(np.linalg.norm(dft_vector(phase, n)) - 1) < 1e-12


class TestGeometry:
    def test_defaults(self, ula):
        lam = SPEED_OF_LIGHT / 28e9
        assert ula.d == pytest.approx(lam / 2)
        assert ula.u == pytest.approx(16 * lam / 2)
        assert ula.size == 32

    @pytest.mark.parametrize("kw", [dict(num_subarrays=0), dict(elements_per_subarray=0),
                                    dict(intra_spacing=-1.0), dict(intra_spacing=0.01, inter_spacing=0.005)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ArrayGeometry("ULA", **kw)

    def test_at_frequency_keeps_spacing(self, ula):
        g = ula.at_frequency(28.05e9)
        assert g.d == ula.d and g.u == ula.u
        assert g.carrier_freq == 28.05e9

    @given(st.floats(-1.5, 1.5))
    def test_phase_roundtrip_ula(self, theta):
        g = ArrayGeometry("ULA", 2, 16)
        assert g.phases_to_angle(g.phases(theta)) == pytest.approx(theta, abs=1e-9)

    @given(st.floats(-np.pi, np.pi), st.floats(0.01, np.pi / 2 - 0.01))
    def test_phase_roundtrip_upa(self, az, el):
        g = ArrayGeometry("UPA", 4, 4)
        a2, e2 = g.phases_to_angle(g.phases((az, el)))
        np.testing.assert_allclose(array_response(g, (a2, e2)), array_response(g, (az, el)), atol=1e-9)


class TestResponse:
    def test_broadside_uniform(self, ula):
        np.testing.assert_allclose(array_response(ula, 0.0), np.full(32, 1 / np.sqrt(32)))

    def test_upa_zero_elevation_uniform(self, upa):
        np.testing.assert_allclose(array_response(upa, (0.7, 0.0)), np.full(16, 0.25))

    def test_contiguous_ula_is_long_dft(self, ula):
        """Sub-arrays spaced by M*d form one 32-element DFT vector."""
        rng = np.random.default_rng(0)
        for theta in rng.uniform(-np.pi, np.pi, 20):
            ref = dft_vector(np.pi * np.sin(theta), 32)
            assert np.max(np.abs(array_response(ula, theta) - ref)) < 1e-12

    @given(angles)
    def test_unit_norm_and_symmetry(self, theta):
        g = ArrayGeometry("ULA", 2, 16)
        a = array_response(g, theta)
        assert abs(np.linalg.norm(a) - 1) < 1e-12
        np.testing.assert_allclose(a, array_response(g, np.pi - theta), atol=1e-12)

    @given(angles)
    def test_kronecker(self, theta):
        g = ArrayGeometry("ULA", 2, 16, inter_spacing=0.2)
        t1, t2 = g.phases(theta)
        np.testing.assert_allclose(array_response(g, theta), np.kron(dft_vector(t1, 2), dft_vector(t2, 16)))


class TestSteeringBeam:
    def test_uniform_weights(self, ula):
        b = steering_beam(ula, 0.0, 0.1)
        np.testing.assert_allclose(b.weights, np.full(32, 1 / np.sqrt(32)))
        assert b.power == 0.1 and b.active_antennas == 32

    def test_self_correlation(self, ula):
        b = steering_beam(ula, 0.4)
        assert abs(np.vdot(b.weights, array_response(ula, 0.4))) == pytest.approx(1.0, abs=1e-12)

    def test_negative_power(self, ula):
        with pytest.raises(ValueError):
            steering_beam(ula, 0.0, -1.0)

    def test_dft_beams_orthogonal(self, ula):
        B = np.column_stack([response_from_phases(ula, *p) for p in dft_grid_phases(ula)])
        np.testing.assert_allclose(B.conj().T @ B, np.eye(32), atol=1e-12)

    def test_beam_rejects_negative_power(self):
        with pytest.raises(ValueError):
            Beam(np.ones(4) / 2, 4, -0.5)


class TestGridTransform:
    @pytest.mark.parametrize("geom", [ArrayGeometry("ULA", 2, 16), ArrayGeometry("ULA", 2, 8, inter_spacing=0.05),
                                      ArrayGeometry("UPA", 2, 8), ArrayGeometry("UPA", 4, 4)])
    @pytest.mark.parametrize("c", [32, 64])
    def test_matches_direct(self, geom, c, rng):
        x = rng.standard_normal((geom.size, 3)) + 1j * rng.standard_normal((geom.size, 3))
        direct = grid_responses(geom, c).conj().T @ x
        np.testing.assert_allclose(grid_transform(geom, x, c), direct, atol=1e-12)

    def test_grid_phase_layout(self, ula, upa):
        assert grid_phases(ula, 64).shape == (64, 2)
        assert grid_phases(upa, 16).shape == (256, 2)
        assert grid_phases(ula, 64)[1, 1] == pytest.approx(2 * np.pi / 64)

    def test_wrong_length(self, ula):
        with pytest.raises(ValueError):
            grid_transform(ula, np.ones(31), 64)
