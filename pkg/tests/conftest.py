import numpy as np
import pytest

import threewave as tw


@pytest.fixture(scope="session")
def ladder800():
    return tw.make_ladder(800)


@pytest.fixture(scope="session")
def ladder200():
    return tw.make_ladder(200)


@pytest.fixture(scope="session")
def ladder50():
    return tw.make_ladder(50)


@pytest.fixture(scope="session")
def fig2_exponential():
    return tw.ExponentialDecay(gamma0=0.01, gamma=1.0)


@pytest.fixture(scope="session")
def fig2_constant():
    return tw.ConstantProduct(c=0.03)


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)


def reference_rhs(n, model, ladder):
    """Independent term-by-term summation of the kinetic equation.

    Deliberately written as explicit loops over the scalar kernels; the
    vectorized implementation is checked against this, never the reverse.
    """
    N = ladder.n_modes
    out = np.zeros(N)
    for j in range(1, N + 1):
        acc = 0.0
        for k in range(1, N + 1):
            njk = n[j + k - 1] if j + k <= N else 0.0
            bracket = njk + n[j - 1] * njk + n[k - 1] * njk - n[j - 1] * n[k - 1]
            acc += tw.kernel_gain(model, j, k, ladder) * bracket
        for k in range(1, j):
            bracket = (
                n[j - 1]
                + n[j - 1] * n[k - 1]
                + n[j - 1] * n[j - k - 1]
                - n[k - 1] * n[j - k - 1]
            )
            acc -= tw.kernel_loss(model, j, k, ladder) * bracket
        out[j - 1] = acc
    return out
