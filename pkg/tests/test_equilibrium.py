import numpy as np
import pytest

import threewave as tw

# high-precision reference values (mpmath, 40 digits)
U_BETA1_N800 = 1.1866007335148928
NB_02342_MODE1 = 3.7893536735015277
BETA_EXACT_U30_N800 = 0.22612689480577848
BETA_EXACT_U10_N800 = 0.38209547691458911
BETA_EXACT_U100_N800 = 0.12580504750128083


class TestBoseEinstein:
    def test_beta_ln2_is_exactly_one(self, ladder50):
        pops = tw.bose_einstein(np.log(2.0), ladder50)
        assert pops.n[0] == pytest.approx(1.0, rel=1e-15)

    def test_scalar_reference_value(self, ladder50):
        pops = tw.bose_einstein(0.2342, ladder50)
        assert pops.n[0] == pytest.approx(NB_02342_MODE1, rel=1e-15)

    def test_large_beta_no_overflow(self, ladder50):
        pops = tw.bose_einstein(100.0, ladder50)
        assert pops.n[0] == pytest.approx(np.exp(-100.0), rel=1e-10)
        assert np.all(pops.n >= 0.0)
        assert np.all(np.isfinite(pops.n))

    def test_underflowed_tail_is_zero(self, ladder800):
        pops = tw.bose_einstein(10.0, ladder800)
        assert pops.n[-1] == 0.0

    def test_rejects_nonpositive_beta(self, ladder50):
        with pytest.raises(ValueError):
            tw.bose_einstein(0.0, ladder50)
        with pytest.raises(ValueError):
            tw.bose_einstein(-1.0, ladder50)


class TestIdentities:
    @pytest.mark.parametrize(
        "beta,j,k", [(0.5, 7, 3), (0.2342, 2, 1), (5.0, 60, 59)]
    )
    def test_example_residuals(self, beta, j, k):
        r_sum, r_diff = tw.check_be_identities(beta, j, k)
        assert r_sum <= 1e-12
        assert r_diff <= 1e-12

    def test_grid_residuals(self):
        worst = 0.0
        for beta in np.linspace(0.05, 5.0, 12):
            for j in range(2, 101, 7):
                for k in range(1, j, 5):
                    r_sum, r_diff = tw.check_be_identities(beta, j, k)
                    worst = max(worst, r_sum, r_diff)
        assert worst <= 1e-12

    def test_requires_j_above_k(self):
        with pytest.raises(ValueError):
            tw.check_be_identities(0.5, 3, 3)
        with pytest.raises(ValueError):
            tw.check_be_identities(0.5, 3, 7)


class TestEnergies:
    def test_single_mode_energy(self, ladder800):
        assert tw.initial_energy(tw.SingleMode(30), ladder800) == 30.0

    def test_zero_state_energy(self, ladder50):
        assert tw.initial_energy(tw.Explicit(np.zeros(50)), ladder50) == 0.0

    def test_explicit_energy(self, ladder50):
        n = np.zeros(50)
        n[1] = 1.5
        n[4] = 2.0
        assert tw.initial_energy(tw.Explicit(n), ladder50) == 13.0

    def test_final_energy_reference(self, ladder800):
        assert tw.final_energy(1.0, ladder800) == pytest.approx(U_BETA1_N800, rel=1e-13)

    def test_final_energy_vanishes_cold(self, ladder800):
        assert tw.final_energy(500.0, ladder800) < 1e-200

    def test_final_energy_monotone(self, ladder800):
        betas = [0.05, 0.1, 0.5, 1.0, 2.0, 5.0]
        values = [tw.final_energy(b, ladder800) for b in betas]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_approx_values(self):
        assert tw.final_energy_approx(1.0) == pytest.approx(np.pi**2 / 6, rel=1e-15)
        assert tw.final_energy_approx(2.0) == pytest.approx(np.pi**2 / 24, rel=1e-15)
        assert tw.final_energy_approx(0.2342) == pytest.approx(29.99, rel=1e-3)

    def test_rejects_nonpositive_beta(self, ladder50):
        with pytest.raises(ValueError):
            tw.final_energy(0.0, ladder50)
        with pytest.raises(ValueError):
            tw.final_energy_approx(-1.0)


class TestBetaApprox:
    @pytest.mark.parametrize(
        "k_ini,expected",
        [(30, 0.23416049103469088), (100, 0.12825498301618641), (10, 0.40557786759736119)],
    )
    def test_values(self, k_ini, expected):
        assert tw.beta_approx(k_ini) == pytest.approx(expected, rel=1e-14)

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            tw.beta_approx(0)


class TestSolveBeta:
    def test_fig2_energy(self, ladder800):
        sol = tw.solve_beta(30.0, ladder800, tol=1e-12)
        assert sol.beta == pytest.approx(BETA_EXACT_U30_N800, rel=1e-9)
        assert 0.20 < sol.beta < 0.24
        assert sol.beta < tw.beta_approx(30)
        assert abs(tw.final_energy(sol.beta, ladder800) - 30.0) <= 1e-10 * 30.0
        assert sol.method == "exact-sum"

    def test_round_trip(self, ladder800):
        u = tw.final_energy(1.0, ladder800)
        sol = tw.solve_beta(u, ladder800, tol=1e-12)
        assert sol.beta == pytest.approx(1.0, rel=1e-10)

    @pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 3.0])
    @pytest.mark.parametrize("n_modes", [50, 800])
    def test_round_trip_grid(self, beta, n_modes):
        lad = tw.make_ladder(n_modes)
        u = tw.final_energy(beta, lad)
        sol = tw.solve_beta(u, lad, tol=1e-12)
        assert sol.beta == pytest.approx(beta, rel=1e-9)

    @pytest.mark.parametrize(
        "u,expected",
        [
            (10.0, BETA_EXACT_U10_N800),
            (30.0, BETA_EXACT_U30_N800),
            (100.0, BETA_EXACT_U100_N800),
        ],
    )
    def test_reference_values_and_approx_ordering(self, ladder800, u, expected):
        sol = tw.solve_beta(u, ladder800)
        assert sol.beta == pytest.approx(expected, rel=1e-9)
        # the discrete sum exceeds the continuum integral at fixed beta, so
        # the exact solution always sits below the approximate inverse
        assert sol.beta < np.pi / np.sqrt(6.0 * u)

    def test_populations_match_bose_einstein(self, ladder50):
        sol = tw.solve_beta(20.0, ladder50)
        expected = tw.bose_einstein(sol.beta, ladder50)
        assert np.array_equal(sol.populations.n, expected.n)

    def test_rejects_nonpositive_target(self, ladder50):
        with pytest.raises(ValueError):
            tw.solve_beta(0.0, ladder50)
        with pytest.raises(ValueError):
            tw.solve_beta(-3.0, ladder50)

    def test_huge_but_finite_target_still_solves(self, ladder50):
        # at tiny beta the sum behaves like N / beta, so even extreme
        # energies stay bracketable as long as they are finite
        sol = tw.solve_beta(1e250, ladder50)
        assert abs(tw.final_energy(sol.beta, ladder50) - 1e250) <= 1e-10 * 1e250

    def test_rejects_nonfinite_target(self, ladder50):
        with pytest.raises(ValueError, match="finite"):
            tw.solve_beta(float("inf"), ladder50)
        with pytest.raises(ValueError):
            tw.solve_beta(float("nan"), ladder50)


class TestEquilibriumSolution:
    def test_validates_fields(self, ladder50):
        pops = tw.bose_einstein(1.0, ladder50)
        with pytest.raises(ValueError):
            tw.EquilibriumSolution(beta=-1.0, u_target=1.0, populations=pops, method="exact-sum")
        with pytest.raises(ValueError):
            tw.EquilibriumSolution(beta=1.0, u_target=1.0, populations=pops, method="guess")
