import numpy as np
import pytest

import threewave as tw

EXP = tw.ExponentialDecay(gamma0=0.01, gamma=1.0)
CONST = tw.ConstantProduct(c=0.03)


class TestKappa:
    def test_zero_coupling_gives_zero_spectrum(self, ladder50):
        zero = tw.Tabular(a2=np.zeros((50, 50)), b2=np.zeros(100))
        spec = tw.kappa(1.0, zero, ladder50)
        assert np.all(spec.kappa == 0.0)

    @pytest.mark.parametrize("beta", [0.1, 0.2342, 1.0, 5.0])
    @pytest.mark.parametrize("model", [EXP, CONST], ids=["exp", "const"])
    def test_all_rates_positive(self, ladder200, beta, model):
        spec = tw.kappa(beta, model, ladder200)
        assert np.all(spec.kappa > 0.0)
        assert np.all(np.isfinite(spec.kappa))

    @pytest.mark.parametrize("beta", [0.2342, 1.0])
    @pytest.mark.parametrize("model", [EXP, CONST], ids=["exp", "const"])
    def test_matches_jacobian_diagonal(self, ladder200, beta, model):
        # the closed thermal forms must reproduce -d(rhs_j)/d(n_j) at n_B
        nb = tw.bose_einstein(beta, ladder200)
        jd = tw.jacobian_diag(nb, model, ladder200)
        spec = tw.kappa(beta, model, ladder200)
        np.testing.assert_allclose(spec.kappa, -jd, rtol=1e-10, atol=0.0)

    def test_matches_finite_differences(self):
        lad = tw.make_ladder(40)
        beta = 0.5
        nb = tw.bose_einstein(beta, lad).n
        op = tw.KineticOperator(EXP, lad)
        spec = tw.kappa(beta, EXP, lad)
        for j in range(0, 40, 5):
            h = 1e-7 * max(1.0, nb[j])
            up, down = nb.copy(), nb.copy()
            up[j] += h
            down[j] -= h
            fd = (op.rhs(up)[j] - op.rhs(down)[j]) / (2 * h)
            assert -fd == pytest.approx(spec.kappa[j], rel=1e-5)

    def test_large_beta_no_overflow(self, ladder200):
        spec = tw.kappa(50.0, EXP, ladder200)
        assert np.all(np.isfinite(spec.kappa))
        assert np.all(spec.kappa > 0.0)

    def test_rejects_nonpositive_beta(self, ladder50):
        with pytest.raises(ValueError):
            tw.kappa(0.0, EXP, ladder50)

    def test_spectrum_is_immutable(self, ladder50):
        spec = tw.kappa(1.0, EXP, ladder50)
        with pytest.raises(ValueError):
            spec.kappa[0] = 1.0


class TestPerturbationDecay:
    def test_positive_kick_relaxes(self):
        lad = tw.make_ladder(60)
        rep = tw.perturbation_decay(0.5, EXP, lad, mode=5, amplitude=0.05, tau_end=250.0)
        assert rep.mode == 5
        assert rep.beta_matched > 0.0
        # the kick adds energy, so the matched temperature is warmer
        assert rep.beta_matched < 0.5
        assert rep.kappa_mode > 0.0
        assert rep.fitted_rate is not None
        assert rep.fitted_rate > 0.0
        # the fitted single-mode rate should land near kappa for this mode;
        # off-diagonal mixing keeps it from matching exactly
        assert rep.fitted_rate == pytest.approx(rep.kappa_mode, rel=0.25)
        assert rep.terminal_distance < 1e-8

    def test_negative_kick_relaxes(self):
        lad = tw.make_ladder(60)
        rep = tw.perturbation_decay(0.5, EXP, lad, mode=5, amplitude=-0.05, tau_end=250.0)
        assert rep.beta_matched > 0.5
        assert rep.terminal_distance < 1e-8

    def test_zero_amplitude_never_decays(self):
        lad = tw.make_ladder(40)
        rep = tw.perturbation_decay(0.5, EXP, lad, mode=3, amplitude=0.0, tau_end=5.0)
        assert rep.fitted_rate is None
        assert rep.terminal_distance < 1e-9

    def test_rejects_large_amplitude(self, ladder50):
        with pytest.raises(ValueError):
            tw.perturbation_decay(0.5, EXP, ladder50, mode=3, amplitude=0.2, tau_end=1.0)

    def test_rejects_underflowed_mode(self, ladder800):
        with pytest.raises(ValueError, match="underflow"):
            tw.perturbation_decay(10.0, EXP, ladder800, mode=500, amplitude=0.05, tau_end=1.0)

    def test_rejects_bad_mode_index(self, ladder50):
        with pytest.raises(ValueError):
            tw.perturbation_decay(0.5, EXP, ladder50, mode=51, amplitude=0.05, tau_end=1.0)
