import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiralchain.chiral import ChainGeometry, ModeModel
from chiralchain.collective import (
    PhasedDickeState,
    dicke_state,
    gamma_init_closed,
    gamma_init_slope,
    survival_amplitude,
    survival_amplitude_regular,
)

REF_MODE = ModeModel(gamma_g=1.0, gamma_r=1.0, k_g=2 * np.pi)


def ramp_state(N, xi, mode=REF_MODE, spacing=0.3):
    """Phased state on a regular chain whose neighbour mismatch is ``xi``."""
    geom = ChainGeometry.regular(N, spacing)
    psi = complex(mode.k_g).real * spacing - xi
    return PhasedDickeState(N, psi), geom


class TestDickeState:
    def test_single(self):
        np.testing.assert_array_equal(dicke_state(1, 0.7), [1.0])

    def test_in_phase(self):
        np.testing.assert_allclose(dicke_state(4, 0.0), [0.5] * 4)

    @given(N=st.integers(1, 200), psi=st.floats(-10, 10))
    def test_normalized(self, N, psi):
        assert np.sum(np.abs(dicke_state(N, psi)) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_size(self):
        with pytest.raises(ValueError):
            dicke_state(0, 0.0)

    def test_mismatch(self):
        assert PhasedDickeState(5, 0.25).xi(1.0) == pytest.approx(0.75)


class TestSurvival:
    def test_starts_at_one(self):
        state, geom = ramp_state(6, 0.4)
        assert abs(survival_amplitude(0.0, state, REF_MODE, geom)) == pytest.approx(1.0)

    def test_single_emitter(self):
        geom = ChainGeometry([0.0])
        t = np.linspace(0, 3, 7)
        np.testing.assert_allclose(
            survival_amplitude(t, PhasedDickeState(1), REF_MODE, geom), np.exp(-1j * REF_MODE.omega * t), rtol=1e-14
        )

    @given(xi=st.floats(0, 2 * np.pi), t=st.floats(0, 5))
    def test_reduced_form_matches_matrix_form(self, xi, t):
        state, geom = ramp_state(10, xi)
        full = survival_amplitude(t, state, REF_MODE, geom)
        reduced = survival_amplitude_regular(t, 10, xi, REF_MODE)
        assert abs(full - reduced) < 1e-12

    def test_reduced_form_array(self):
        t = np.linspace(0, 2, 9)
        assert survival_amplitude_regular(t, 4, 0.3, REF_MODE).shape == (9,)


class TestInitialRate:
    def test_reference_values(self):
        assert gamma_init_closed(0.0, 10, REF_MODE) == pytest.approx(6.5, abs=1e-12)
        assert gamma_init_closed(np.pi, 10, REF_MODE) == pytest.approx(1.5, abs=1e-12)
        for xi, ref in [(0.0, 6.5), (np.pi, 1.5)]:
            state, geom = ramp_state(10, xi)
            assert gamma_init_slope(state, REF_MODE, geom) == pytest.approx(ref, rel=1e-5)

    def test_out_of_phase_is_minimum_for_even_chains(self):
        xi = np.linspace(0, 2 * np.pi, 721)
        vals = gamma_init_closed(xi, 10, REF_MODE)
        assert vals.min() == pytest.approx(gamma_init_closed(np.pi, 10, REF_MODE), abs=1e-12)

    @pytest.mark.parametrize("N", [4, 7, 10])
    def test_minimum_is_reached_at_every_dark_phase(self, N):
        # the ramp sum is a Fejer kernel: Re S >= -1/2 with equality at xi = 2 pi m / N
        xi = 2 * np.pi * np.arange(1, N) / N
        np.testing.assert_allclose(gamma_init_closed(xi, N, REF_MODE), REF_MODE.gamma_tot - 0.5, atol=1e-12)
        dense = np.linspace(0, 2 * np.pi, 2001)
        assert gamma_init_closed(dense, N, REF_MODE).min() >= REF_MODE.gamma_tot - 0.5 - 1e-12

    def test_periodic(self):
        xi = np.linspace(0, 2 * np.pi, 37)
        np.testing.assert_allclose(gamma_init_closed(xi, 7, REF_MODE), gamma_init_closed(xi + 2 * np.pi, 7, REF_MODE), atol=1e-9)

    def test_continuous_through_in_phase_point(self):
        eps = np.array([1e-4, 1e-5, 1e-7, 0.0, -1e-7])
        vals = gamma_init_closed(eps, 12, REF_MODE)
        np.testing.assert_allclose(vals, gamma_init_closed(0.0, 12, REF_MODE), atol=1e-5)

    def test_single_emitter(self):
        assert gamma_init_closed(0.3, 1, REF_MODE) == pytest.approx(REF_MODE.gamma_tot)
        assert gamma_init_slope(PhasedDickeState(1), REF_MODE, ChainGeometry([0.0])) == pytest.approx(2.0, rel=1e-8)

    @pytest.mark.parametrize("xi", np.linspace(0.05, 2 * np.pi - 0.05, 9))
    def test_slope_matches_closed_form(self, xi):
        state, geom = ramp_state(10, xi)
        closed = gamma_init_closed(xi, 10, REF_MODE)
        assert gamma_init_slope(state, REF_MODE, geom) == pytest.approx(closed, rel=1e-5)

    def test_large_chain_halving(self):
        mode = ModeModel(gamma_g=1.0, gamma_r=1e-3)
        assert gamma_init_closed(0.0, 400, mode) / 400 == pytest.approx(0.5, abs=0.01)

    def test_symmetric_waveguide_doubles_rate(self):
        mode = ModeModel(gamma_g=1.0, gamma_r=1e-3, k_g=2 * np.pi, beta=0.5)
        geom = ChainGeometry.regular(40, 1.0)
        rate = gamma_init_slope(dicke_state(40, 0.0), mode, geom)
        assert rate / 40 == pytest.approx(1.0, abs=0.03)
