import math

import numpy as np
import pytest
from scipy.linalg import expm

from bosecool import gaussian as G
from bosecool import hbac
from bosecool.errors import DimensionMismatchError, DomainError


def small_random_passive(j, rng, eps=1e-4):
    a = rng.standard_normal((j, j)) + 1j * rng.standard_normal((j, j))
    h = (a + a.conj().T) / 2
    h /= np.linalg.norm(h)
    return G.make_passive(expm(1j * eps * h))


class TestMachineSpec:
    def test_rejects_unsorted(self):
        with pytest.raises(DomainError):
            hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0, 1.5))

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            hbac.MachineSpec(beta=-1.0, omega0=1.0, omegas=(2.0,))

    def test_j0_skips_low_modes(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(0.5, 2.0, 3.0))
        assert spec.j0 == 2
        assert spec.cooling_possible

    def test_no_cooling_flag(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=2.0, omegas=(0.5, 1.0))
        assert spec.j0 is None
        assert not spec.cooling_possible


class TestCoolingLimit:
    def test_equal_frequencies_no_gain(self):
        spec = hbac.MachineSpec(beta=0.7, omega0=1.0, omegas=(1.0,))
        beta_star, lam = hbac.gaussian_cooling_limit(spec)
        assert lam == 1.0
        assert beta_star == pytest.approx(0.7)

    def test_lambda_ratio(self):
        spec = hbac.MachineSpec(beta=0.3, omega0=1.0, omegas=(120.8,))
        assert hbac.gaussian_cooling_limit(spec)[1] == pytest.approx(120.8)

    def test_limit_occupation(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0,))
        beta_star, _ = hbac.gaussian_cooling_limit(spec)
        nbar_limit = 1.0 / math.expm1(beta_star * spec.omega0)
        assert nbar_limit == pytest.approx(1.0 / (math.e**2 - 1.0), rel=1e-12)


class TestSwapChain:
    def test_single_mode_single_swap(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0,))
        chain = hbac.build_swap_chain(spec)
        np.testing.assert_allclose(chain.unitary.G, G.make_swap(0, 1, 2).G, atol=1e-14)

    def test_chain_skips_inert_mode(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(0.5, 2.0, 3.0))
        chain = hbac.build_swap_chain(spec)
        assert chain.j0 == 2
        ref = G.compose(G.make_swap(0, 3, 4), G.make_swap(0, 2, 4))
        np.testing.assert_allclose(chain.unitary.G, ref.G, atol=1e-14)

    def test_one_round_reaches_machine_top(self):
        spec = hbac.MachineSpec(beta=0.8, omega0=1.0, omegas=(1.5, 2.5))
        chain = hbac.build_swap_chain(spec)
        joint = G.tensor(spec.initial_system(), spec.machine_state())
        out = G.reduce(G.apply_unitary(joint, chain.unitary), [0])
        assert G.thermal_excitation(out) == pytest.approx(
            spec.nbar(2.5), rel=1e-13
        )

    def test_no_cooling_returns_identity(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=2.0, omegas=(1.0,))
        chain = hbac.build_swap_chain(spec)
        assert not chain.cooling
        np.testing.assert_allclose(chain.unitary.G, np.eye(4), atol=1e-15)


class TestRelativeEntropy:
    def test_zero_at_equal(self):
        assert hbac.relative_entropy_gibbs(2.0, 2.0) == 0.0

    def test_matches_series_oracle(self):
        # D = sum p_n ln(p_n/q_n) with geometric p (nbar_a) and q (nbar_b).
        na, nb = 10.0, 1.0
        n = np.arange(6000)
        logp = n * math.log(na) - (n + 1) * math.log(na + 1)
        logq = n * math.log(nb) - (n + 1) * math.log(nb + 1)
        series = float(np.sum(np.exp(logp) * (logp - logq)))
        assert hbac.relative_entropy_gibbs(na, nb) == pytest.approx(series, rel=1e-12)
        assert series == pytest.approx(
            11 * math.log(2 / 11) + 10 * math.log(10), rel=1e-12
        )

    def test_asymmetric(self):
        assert hbac.relative_entropy_gibbs(1.0, 2.0) != pytest.approx(
            hbac.relative_entropy_gibbs(2.0, 1.0)
        )

    def test_positive_off_diagonal(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b = rng.uniform(0.05, 8.0, size=2)
            d = hbac.relative_entropy_gibbs(a, b)
            assert d >= 0.0
            if abs(a - b) > 1e-6:
                assert d > 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            hbac.relative_entropy_gibbs(0.0, 1.0)


class TestEntropyProductionStar:
    def test_single_mode(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0,))
        expected = hbac.relative_entropy_gibbs(spec.nbar(1.0), spec.nbar(2.0))
        assert hbac.entropy_production_star(spec) == pytest.approx(expected, rel=1e-14)

    def test_degenerate_gaps_contribute_zero(self):
        base = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0,))
        padded = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0, 2.0, 2.0))
        assert hbac.entropy_production_star(padded) == pytest.approx(
            hbac.entropy_production_star(base), rel=1e-14
        )

    def test_no_cooling_returns_zero(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=3.0, omegas=(1.0,))
        assert hbac.entropy_production_star(spec) == 0.0

    def test_inert_modes_change_nothing(self):
        spec = hbac.MachineSpec(beta=0.9, omega0=1.0, omegas=(0.3, 0.9, 1.7, 2.4))
        trimmed = hbac.MachineSpec(beta=0.9, omega0=1.0, omegas=(1.7, 2.4))
        assert hbac.entropy_production_star(spec) == pytest.approx(
            hbac.entropy_production_star(trimmed), rel=1e-14
        )
        assert hbac.gaussian_cooling_limit(spec)[0] == pytest.approx(
            hbac.gaussian_cooling_limit(trimmed)[0], rel=1e-14
        )

    def test_matches_protocol_trace(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            spec = hbac.random_spec(rng)
            chain = hbac.build_swap_chain(spec)
            trace = hbac.run_protocol(spec, chain.unitary, 1)
            assert trace.final.sigma == pytest.approx(
                hbac.entropy_production_star(spec), abs=1e-9
            )


class TestRunProtocol:
    def test_identity_recharger_flat(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0, 3.0))
        trace = hbac.run_protocol(spec, G.identity_unitary(3), 4)
        np.testing.assert_allclose(trace.nth, spec.nbar_system, rtol=1e-13)
        np.testing.assert_allclose(trace.sigma, 0.0, atol=1e-12)
        np.testing.assert_allclose(trace.heat, 0.0, atol=1e-13)

    def test_swap_chain_saturates_in_one_round(self):
        spec = hbac.MachineSpec(beta=1.3, omega0=0.9, omegas=(1.2, 2.2))
        chain = hbac.build_swap_chain(spec)
        trace = hbac.run_protocol(spec, chain.unitary, 5)
        beta_star, _ = hbac.gaussian_cooling_limit(spec)
        assert trace.records[0].beta_eff == pytest.approx(beta_star, rel=1e-12)
        np.testing.assert_allclose(trace.nth, trace.nth[0], rtol=1e-13)

    def test_beam_splitter_lands_between(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0,))
        bs = G.make_beam_splitter(0, 1, 2, 0.6)
        trace = hbac.run_protocol(spec, bs, 1)
        assert spec.nbar(2.0) < trace.final.nth < spec.nbar_system

    def test_dimension_mismatch(self):
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(2.0,))
        with pytest.raises(DimensionMismatchError):
            hbac.run_protocol(spec, G.identity_unitary(3), 1)

    def test_second_law_random_rechargers(self):
        rng = np.random.default_rng(8)
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(1.5, 2.5))
        for _ in range(20):
            u = G.random_gaussian_unitary(3, rng, max_squeeze=0.8)
            trace = hbac.run_protocol(spec, u, 5)
            assert np.all([r.sigma_round >= -1e-10 for r in trace])

    def test_sigma_matches_decomposition(self):
        rng = np.random.default_rng(13)
        spec = hbac.MachineSpec(beta=0.8, omega0=1.0, omegas=(1.4, 2.1))
        for _ in range(10):
            u = G.random_gaussian_unitary(3, rng, max_squeeze=0.8)
            trace = hbac.run_protocol(spec, u, 3)
            for r in trace:
                assert r.sigma_round == pytest.approx(
                    r.relent_machine + r.mutual_information, abs=1e-8
                )

    def test_thermal_bound_random_rechargers(self):
        # No Gaussian recharger beats the top machine occupation, any round count.
        rng = np.random.default_rng(15)
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(1.8, 2.6))
        floor = spec.nbar(2.6)
        for _ in range(15):
            u = G.random_gaussian_unitary(3, rng, max_squeeze=1.0)
            trace = hbac.run_protocol(spec, u, 20)
            assert np.min(trace.nth) >= floor - 1e-9


class TestNearOptimalRechargers:
    def test_sigma_floor_near_swap_chain(self):
        # Rechargers that still reach the cooling limit cannot beat the
        # swap-chain entropy production.
        rng = np.random.default_rng(31)
        spec = hbac.MachineSpec(beta=1.0, omega0=1.0, omegas=(1.6, 2.3))
        chain = hbac.build_swap_chain(spec)
        sigma_star = hbac.entropy_production_star(spec)
        floor = spec.nbar(2.3)
        tested = 0
        for _ in range(60):
            u = G.compose(
                small_random_passive(3, rng),
                G.compose(chain.unitary, small_random_passive(3, rng)),
            )
            trace = hbac.run_protocol(spec, u, 1)
            if abs(trace.final.nth - floor) < 1e-6:
                tested += 1
                assert trace.final.sigma >= sigma_star - 1e-6
        assert tested >= 30


class TestSymplecticSpectrum:
    def test_product_thermal_spectrum(self):
        s = G.product_thermal([0.3, 1.2, 2.7])
        np.testing.assert_allclose(
            hbac.symplectic_nbars(s), [0.3, 1.2, 2.7], atol=1e-12
        )

    def test_entropy_invariant_under_unitaries(self):
        rng = np.random.default_rng(19)
        s = G.product_thermal([0.4, 1.1])
        base = hbac.state_entropy(s)
        for _ in range(10):
            u = G.random_gaussian_unitary(2, rng)
            assert hbac.state_entropy(G.apply_unitary(s, u)) == pytest.approx(
                base, abs=1e-9
            )
