import math

import numpy as np
import pytest

from bosecool import spectrum as S
from bosecool.errors import DomainError
from bosecool.hbac import relative_entropy_gibbs


class TestProblem:
    def test_rejects_bad_endpoints(self):
        with pytest.raises(DomainError):
            S.SpectrumProblem(g0=1.0, gN=0.5, n_modes=2)
        with pytest.raises(DomainError):
            S.SpectrumProblem(g0=-1.0, gN=0.5, n_modes=2)
        with pytest.raises(DomainError):
            S.SpectrumProblem(g0=0.5, gN=1.0, n_modes=0)

    def test_from_occupation(self):
        p = S.SpectrumProblem.from_occupation(10.0, 4.0, 3)
        assert p.g0 == pytest.approx(math.log(1.1), rel=1e-14)
        assert p.gN == pytest.approx(4 * math.log(1.1), rel=1e-14)


class TestAnalyticTrajectory:
    def test_endpoints_exact(self):
        p = S.SpectrumProblem(g0=0.3, gN=2.7, n_modes=7)
        assert S.analytic_trajectory(p, 0) == pytest.approx(0.3, abs=1e-12)
        assert S.analytic_trajectory(p, 7) == pytest.approx(2.7, abs=1e-12)

    def test_endpoints_exact_extreme(self):
        p = S.SpectrumProblem(g0=1e-4, gN=math.log(1 + 1e5), n_modes=5)
        assert S.analytic_trajectory(p, 0) == pytest.approx(1e-4, rel=1e-11)
        assert S.analytic_trajectory(p, 5) == pytest.approx(p.gN, rel=1e-12)

    def test_constant_when_endpoints_meet(self):
        # gN must exceed g0 for a problem; check near-degenerate flatness.
        p = S.SpectrumProblem(g0=1.0, gN=1.0 + 1e-9, n_modes=4)
        g = S.analytic_trajectory(p, np.arange(5))
        assert np.max(np.abs(g - 1.0)) < 1e-8

    def test_monotone_increasing(self):
        p = S.SpectrumProblem(g0=0.1, gN=5.0, n_modes=20)
        g = S.analytic_trajectory(p, np.arange(21))
        assert np.all(np.diff(g) > 0)

    def test_recurrence_residual_second_order(self):
        # Residual of the sampled continuum points decays at least like 1/N^2.
        p100 = S.SpectrumProblem(g0=math.log(1.1), gN=20 * math.log(1.1), n_modes=100)
        p200 = S.SpectrumProblem(g0=p100.g0, gN=p100.gN, n_modes=200)
        r100 = S.stationarity_residual(S.analytic_trajectory(p100, np.arange(101)))
        r200 = S.stationarity_residual(S.analytic_trajectory(p200, np.arange(201)))
        assert r100 < 1e-4
        assert r200 < r100 / 4


class TestSolveStationarity:
    def test_single_mode_closed_form(self):
        p = S.SpectrumProblem(g0=0.2, gN=1.1, n_modes=1)
        sol = S.solve_stationarity(p)
        nb = S.occupation_from_gap(np.array([0.2, 1.1]))
        assert sol.sigma == pytest.approx(relative_entropy_gibbs(nb[0], nb[1]), rel=1e-14)
        assert sol.residual == 0.0

    def test_residual_certificate(self):
        for lam in (1.2, 3.0, 20.0, 120.8):
            p = S.SpectrumProblem.from_occupation(10.0, lam, 5)
            sol = S.solve_stationarity(p)
            assert sol.residual < 1e-12
            assert np.all(np.diff(sol.g) > 0)

    def test_matches_brute_force_scan_n2(self):
        # One interior point: golden-section style dense scan as oracle.
        p = S.SpectrumProblem.from_occupation(10.0, 5.0, 2)
        nb0 = float(S.occupation_from_gap(p.g0))
        nbN = float(S.occupation_from_gap(p.gN))
        xs = np.linspace(nbN * 1.0001, nb0 * 0.9999, 400001)
        vals = (
            (nb0 + 1) * (np.log1p(xs) - np.log1p(nb0))
            + nb0 * (np.log(nb0) - np.log(xs))
            + (xs + 1) * (np.log1p(nbN) - np.log1p(xs))
            + xs * (np.log(xs) - np.log(nbN))
        )
        best = xs[np.argmin(vals)]
        sol = S.solve_stationarity(p)
        assert sol.nbars[1] == pytest.approx(best, abs=2e-5)
        assert sol.sigma <= np.min(vals) + 1e-12

    def test_perturbing_interior_increases_sigma(self):
        p = S.SpectrumProblem.from_occupation(10.0, 4.0, 4)
        sol = S.solve_stationarity(p)
        nb = sol.nbars
        base = S.relative_entropy_chain(nb)
        for j in range(1, 4):
            for eps in (+1e-4, -1e-4):
                trial = nb.copy()
                trial[j] += eps
                assert S.relative_entropy_chain(trial) > base

    def test_convexity_certificate_positive(self):
        for lam in (1.1, 2.0, 50.0):
            p = S.SpectrumProblem.from_occupation(10.0, lam, 5)
            sol = S.solve_stationarity(p)
            assert S.convexity_certificate(sol) > 0.0

    def test_nested_optimality(self):
        sigmas = [
            S.solve_stationarity(S.SpectrumProblem.from_occupation(10.0, 6.0, n)).sigma
            for n in (1, 2, 3, 4, 6)
        ]
        assert all(b <= a for a, b in zip(sigmas, sigmas[1:]))

    def test_numeric_beats_analytic_sampling(self):
        for n in (2, 3, 5, 8):
            p = S.SpectrumProblem.from_occupation(10.0, 120.8, n)
            num = S.solve_stationarity(p).sigma
            ana = S.analytic_sampled_solution(p).sigma
            assert num <= ana + 1e-12

    def test_analytic_gap_shrinks_with_n(self):
        gaps = []
        for n in (2, 4, 8, 16):
            p = S.SpectrumProblem.from_occupation(10.0, 20.0, n)
            num = S.solve_stationarity(p).sigma
            ana = S.analytic_sampled_solution(p).sigma
            gaps.append(ana - num)
        assert all(b < a for a, b in zip(gaps, gaps[1:]))


class TestSigmaLargeN:
    def test_degenerate_endpoint_limit(self):
        p = S.SpectrumProblem(g0=1.0, gN=1.0 + 1e-12, n_modes=3)
        assert S.sigma_large_n(p) == pytest.approx(0.0, abs=1e-20)

    def test_explicit_inverse_n(self):
        p1 = S.SpectrumProblem(g0=0.3, gN=2.0, n_modes=10)
        p2 = S.SpectrumProblem(g0=0.3, gN=2.0, n_modes=20)
        assert S.sigma_large_n(p2) == pytest.approx(S.sigma_large_n(p1) / 2, rel=1e-14)

    def test_numeric_convergence(self):
        p = S.SpectrumProblem(g0=math.log(1.1), gN=20 * math.log(1.1), n_modes=100)
        num = S.solve_stationarity(p).sigma
        asym = S.sigma_large_n(p)
        assert abs(num - asym) / asym < 0.05


class TestSweep:
    def test_ordering_and_positivity(self):
        lambdas = np.geomspace(1.05, 20.0, 12)
        rows = S.sweep_sigma_vs_lambda(10.0, lambdas, [1, 2, 4])
        by_n = {
            n: [r["sigma_star_star"] for r in rows if r["N"] == n] for n in (1, 2, 4)
        }
        for n in (1, 2, 4):
            vals = np.array(by_n[n])
            assert np.all(vals > 0)
            assert np.all(np.diff(vals) > 0)  # increasing in lambda
        assert np.all(np.array(by_n[4]) < np.array(by_n[2]))
        assert np.all(np.array(by_n[2]) < np.array(by_n[1]))

    def test_vanishes_toward_unit_ratio(self):
        row = S.sweep_sigma_vs_lambda(10.0, [1.0005], [1, 2])
        assert all(r["sigma_star_star"] < 2e-5 for r in row)

    def test_rows_sorted(self):
        rows = S.sweep_sigma_vs_lambda(10.0, [3.0, 1.5], [2, 1])
        keys = [(r["N"], r["lambda"]) for r in rows]
        assert keys == sorted(keys)
