import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiralchain.chiral import ChainGeometry, ModeModel, evolve
from chiralchain.collective import dicke_state, gamma_init_slope
from chiralchain.errors import GeometryError, NumericalError
from chiralchain.evolution import (
    DisorderConfig,
    EffectiveHamiltonian,
    NanowireModel,
    calibrate,
    disorder_ensemble,
    effective_hamiltonian,
    evolve_matrix_exp,
    evolve_ode_oracle,
    ideal_selfenergy,
    peak_times,
    perturbed_positions,
    realization_seed,
)
from chiralchain.greens import spp_mode


def random_dissipative(rng, N):
    """Non-Hermitian matrix whose anti-Hermitian part is negative semidefinite."""
    a = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    herm = (a + a.conj().T) / 2
    b = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return herm - 0.5j * (b @ b.conj().T) / N


class TestIdealSelfEnergy:
    def test_unidirectional_is_lower_triangular(self, chain5):
        mode = ModeModel(gamma_g=0.8, gamma_r=0.2, k_g=5.0)
        s = ideal_selfenergy(mode, chain5).values
        assert np.all(np.triu(s, 1) == 0)
        n, m = np.tril_indices(5, -1)
        np.testing.assert_allclose(np.abs(s[n, m]), 0.4)
        np.testing.assert_allclose(np.diag(s), -0.5j)

    def test_symmetric_at_half(self):
        mode = ModeModel(gamma_g=1.0, k_g=2 * np.pi, beta=0.5)
        s = ideal_selfenergy(mode, ChainGeometry.regular(4, 1.0)).values
        off = s[~np.eye(4, dtype=bool)]
        np.testing.assert_allclose(off, off[0], atol=1e-13)
        np.testing.assert_allclose(s, s.T, atol=1e-13)

    def test_symmetric_slope_is_dicke(self):
        mode = ModeModel(gamma_g=1.0, gamma_r=1e-3, k_g=2 * np.pi, beta=0.5)
        geom = ChainGeometry.regular(20, 1.0)
        rate = gamma_init_slope(dicke_state(20, 0.0), mode, geom)
        assert rate == pytest.approx(mode.gamma_tot + 19 * mode.gamma_g, rel=1e-4)

    def test_no_guided_coupling(self, chain5):
        s = ideal_selfenergy(ModeModel(gamma_g=0.0, gamma_r=1.0), chain5).values
        assert np.count_nonzero(s - np.diag(np.diag(s))) == 0

    @pytest.mark.parametrize("beta", [0.0, 0.2, 0.8, 1.0])
    def test_mirror_in_beta(self, beta, chain5):
        a = ideal_selfenergy(ModeModel(beta=beta), chain5).values
        b = ideal_selfenergy(ModeModel(beta=1 - beta), chain5).values
        np.testing.assert_allclose(a, b.T, atol=1e-15)


class TestMatrixExponential:
    def test_diagonal(self):
        h = np.diag([0.3 - 0.5j, -0.1 - 0.2j, -0.05j])
        t = np.linspace(0, 5, 11)
        c0 = np.array([0.6, 0.8j, 0.0])
        tr = evolve_matrix_exp(h, c0, t)
        np.testing.assert_allclose(tr.amplitudes, np.exp(-1j * np.diag(h)[:, None] * t) * c0[:, None], atol=1e-12)

    def test_matches_laguerre(self):
        mode = ModeModel(gamma_g=1.0, gamma_r=0.3, delta_L=0.2, k_g=6.0 + 0.1j)
        geom = ChainGeometry([0.0, 0.8, 1.5, 3.0, 3.2, 4.9])
        h = effective_hamiltonian(ideal_selfenergy(mode, geom), mode.delta_L)
        t = np.linspace(0, 15, 31)
        c0 = np.exp(0.4j * np.arange(6)) / np.sqrt(6)
        np.testing.assert_allclose(evolve_matrix_exp(h, c0, t).amplitudes, evolve(c0, t, mode, geom).amplitudes, atol=1e-8)

    def test_norm_never_grows(self):
        h = random_dissipative(np.random.default_rng(3), 8)
        c0 = np.ones(8) / np.sqrt(8)
        tr = evolve_matrix_exp(h, c0, np.linspace(0, 4, 41))
        assert np.all(np.diff(tr.total) <= 1e-12)

    def test_residual_check_flags_inconsistency(self):
        h = np.array([[-0.5j]])
        t = np.array([0.0, 1.0, 2.0])
        with pytest.raises(NumericalError):
            evolve_matrix_exp(h, [1.0], t, tol=-1.0)


class TestOdeOracle:
    def test_single_emitter(self):
        t = np.linspace(0, 4, 9)
        tr = evolve_ode_oracle(np.array([[-0.75j]]), [1.0], t)
        np.testing.assert_allclose(tr.amplitudes[0], np.exp(-0.75 * t), rtol=1e-10)

    @given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 20))
    def test_agrees_with_expm(self, seed, N):
        rng = np.random.default_rng(seed)
        h = random_dissipative(rng, N)
        c0 = rng.normal(size=N) + 1j * rng.normal(size=N)
        c0 /= np.linalg.norm(c0)
        t = np.linspace(0, 3, 7)
        a = evolve_ode_oracle(h, c0, t).amplitudes
        b = evolve_matrix_exp(h, c0, t).amplitudes
        np.testing.assert_allclose(a, b, atol=1e-8)

    def test_time_reversal(self):
        h = random_dissipative(np.random.default_rng(11), 6)
        c0 = np.eye(6)[2].astype(complex)
        fwd = evolve_ode_oracle(h, c0, [0.0, 1.0]).amplitudes[:, -1]
        back = evolve_ode_oracle(-h, fwd, [0.0, 1.0]).amplitudes[:, -1]
        np.testing.assert_allclose(back, c0, atol=1e-7)


class TestHamiltonian:
    def test_dissipative(self, chain5):
        h = effective_hamiltonian(ideal_selfenergy(ModeModel(), chain5))
        assert isinstance(h, EffectiveHamiltonian) and h.N == 5
        assert h.is_dissipative()
        assert not EffectiveHamiltonian(np.diag([0.1j, -0.2j])).is_dissipative()

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            EffectiveHamiltonian(np.zeros((2, 3)))


class TestDisorder:
    def test_positions_increasing(self):
        z = np.arange(6) * 1.0
        for i in range(30):
            p = perturbed_positions(z, 0.49, realization_seed(5, i))
            assert np.all(np.diff(p) > 0) and np.all(np.abs(p - z) <= 0.49)

    def test_zero_amplitude(self):
        z = np.arange(4.0)
        np.testing.assert_array_equal(perturbed_positions(z, 0.0, realization_seed(0, 0)), z)

    def test_gives_up(self):
        with pytest.raises(GeometryError):
            perturbed_positions(np.arange(40) * 0.01, 5.0, realization_seed(0, 0), max_retries=3)

    def test_seeds_independent_of_order(self):
        a = np.random.default_rng(realization_seed(9, 4)).uniform(size=3)
        b = np.random.default_rng(realization_seed(9, 4)).uniform(size=3)
        c = np.random.default_rng(realization_seed(9, 5)).uniform(size=3)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_unidirectional_chain_ignores_disorder(self, unit_mode, chain5):
        t = np.linspace(0, 20, 200)
        c0 = np.eye(5)[0]
        ens = disorder_ensemble(chain5, DisorderConfig(10, 0.8, 1), unit_mode, c0, t)
        ref = evolve(c0, t, unit_mode, chain5).probabilities
        assert np.abs(ens.mean - ref).max() < 1e-12

    def test_zero_amplitude_is_unperturbed(self, chain5):
        mode = ModeModel(beta=0.7)
        t = np.linspace(0, 5, 30)
        c0 = np.eye(5)[0]
        ens = disorder_ensemble(chain5, DisorderConfig(3, 0.0), mode, c0, t)
        for p in ens.probabilities:
            np.testing.assert_array_equal(p, ens.probabilities[0])
        np.testing.assert_allclose(ens.mean, ens.probabilities[0], rtol=1e-15)

    def test_thread_count_does_not_matter(self, chain5):
        mode = ModeModel(beta=0.8, k_g=6.0)
        t = np.linspace(0, 6, 40)
        c0 = np.eye(5)[0]
        cfg = DisorderConfig(8, 0.3, 42)
        a = disorder_ensemble(chain5, cfg, mode, c0, t, threads=1)
        b = disorder_ensemble(chain5, cfg, mode, c0, t, threads=4)
        assert a.mean.tobytes() == b.mean.tobytes()
        assert all(np.array_equal(x, y) for x, y in zip(a.positions, b.positions))


class TestCalibration:
    def test_recovers_ideal_parameters(self, chain5):
        mode = ModeModel(gamma_g=0.7, gamma_r=0.4, delta_L=-0.3, k_g=7.0 + 0.02j)
        sigma = ideal_selfenergy(mode, chain5).values + mode.delta_L * np.eye(5)
        cal = calibrate(sigma, chain5, mode.k_g)
        assert cal.gamma_g == pytest.approx(0.7)
        assert cal.delta_L == pytest.approx(-0.3)
        assert cal.gamma_tot == pytest.approx(1.1)
        back = cal.mode_model()
        assert back.gamma_r == pytest.approx(0.4)
        assert cal.as_dict()["k_g"] == [7.0, 0.02]

    def test_nanowire_model(self, wire):
        geom = ChainGeometry.regular(3, 2.0, 0.05)
        model = NanowireModel(wire)
        cal = calibrate(model.self_energy(geom), geom, spp_mode(wire).k_g)
        assert cal.gamma_tot > 0 and cal.gamma_g > 0
        assert cal.lambda_pl == pytest.approx(spp_mode(wire).wavelength)

    def test_needs_two_emitters(self):
        with pytest.raises(ValueError):
            calibrate(np.array([[-0.5j]]), ChainGeometry([0.0]), 6.0)


def test_peak_times():
    t = np.linspace(0, 10, 101)
    p = np.vstack([(t / 2) ** 2 * np.exp(-t), np.exp(-((t - 3.33) ** 2))])
    np.testing.assert_allclose(peak_times(t, p), [2.0, 3.33], atol=2e-3)
