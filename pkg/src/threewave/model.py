"""Mode ladder, coupling kernels, population states and initial conditions.

Everything downstream works in reduced units: hbar = 1, frequency spacing
delta_omega = 1, time measured as tau = delta_omega * t.  Mode energies are
then just the mode index, and all rate prefactors (the 4*pi/hbar^2 * nu0
factor and the factor 2 of the gain sum) are folded into the kernels here so
the kinetics module never sees them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "ModeLadder",
    "ExponentialDecay",
    "ConstantProduct",
    "Tabular",
    "CouplingModel",
    "PopulationState",
    "SingleMode",
    "Explicit",
    "InitialCondition",
    "QuadraticCoupling",
    "make_ladder",
    "kernel_gain",
    "kernel_loss",
    "gain_matrix",
    "loss_matrix",
]


@dataclass(frozen=True)
class ModeLadder:
    """Equidistant spectrum of N modes, omega(k) = k * delta_omega."""

    n_modes: int
    delta_omega: float = 1.0

    def __post_init__(self):
        if self.n_modes < 2:
            raise ValueError(f"need at least 2 modes, got {self.n_modes}")
        if not (self.delta_omega > 0):
            raise ValueError(f"mode spacing must be positive, got {self.delta_omega}")

    @property
    def density_of_modes(self) -> float:
        return 1.0 / self.delta_omega

    def omega(self, k: int) -> float:
        self._check_index(k)
        return k * self.delta_omega

    def omegas(self) -> np.ndarray:
        return self.delta_omega * np.arange(1, self.n_modes + 1, dtype=float)

    def _check_index(self, k: int) -> None:
        if not 1 <= k <= self.n_modes:
            raise ValueError(f"mode index {k} outside 1..{self.n_modes}")


def make_ladder(n_modes: int, delta_omega: float = 1.0) -> ModeLadder:
    return ModeLadder(n_modes, delta_omega)


def _as_readonly(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ExponentialDecay:
    """|A_pq|^2 = g^2 exp(-gamma |p-q|), |B_r|^2 = r (zero for r > N).

    gamma0 is the full dimensionless rate prefactor (4 pi / hbar^2) nu0 g^2
    in units of delta_omega, so g^2 never appears on its own.
    """

    gamma0: float
    gamma: float

    def __post_init__(self):
        if self.gamma0 < 0:
            raise ValueError("rate prefactor gamma0 must be >= 0")

    def _a2_pref(self, p, q):
        # gamma0 * |A_pq|^2 / g^2
        return self.gamma0 * np.exp(-self.gamma * np.abs(p - q))

    def _b2(self, r, n_modes):
        return np.where(r <= n_modes, r, 0.0)


@dataclass(frozen=True)
class ConstantProduct:
    """(4 pi / hbar^2) |A_pq|^2 |B_r|^2 = c for every p, q, r <= N."""

    c: float

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("kernel value c must be >= 0")


@dataclass(frozen=True)
class Tabular:
    """Explicit kernel tables: a2[p-1, q-1] = |A_pq|^2, b2[r-1] = |B_r|^2.

    a2 is N x N and must be symmetric (energy conservation relies on it);
    b2 has length 2N and its tail r > N is forced to zero by the truncation
    rule.  The (4 pi / hbar^2) nu0 prefactor is applied by the kernels with
    nu0 in reduced units (= 1).
    """

    a2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        a2 = np.array(self.a2, dtype=float)
        if a2.ndim != 2 or a2.shape[0] != a2.shape[1]:
            raise ValueError(f"a2 must be square, got shape {a2.shape}")
        n = a2.shape[0]
        if not np.array_equal(a2, a2.T):
            raise ValueError("a2 must be symmetric: |A_pq|^2 = |A_qp|^2")
        if np.any(a2 < 0) or not np.all(np.isfinite(a2)):
            raise ValueError("a2 entries must be finite and >= 0")
        b2 = np.array(self.b2, dtype=float)
        if b2.shape != (2 * n,):
            raise ValueError(f"b2 must have length {2 * n}, got shape {b2.shape}")
        if np.any(b2 < 0) or not np.all(np.isfinite(b2)):
            raise ValueError("b2 entries must be finite and >= 0")
        b2 = b2.copy()
        b2[n:] = 0.0  # truncation rule
        a2.setflags(write=False)
        b2.setflags(write=False)
        object.__setattr__(self, "a2", a2)
        object.__setattr__(self, "b2", b2)

    @property
    def n_modes(self) -> int:
        return self.a2.shape[0]


CouplingModel = Union[ExponentialDecay, ConstantProduct, Tabular]

# (4 pi / hbar^2) nu0 in reduced units, applied to raw Tabular tables only;
# ExponentialDecay.gamma0 and ConstantProduct.c already include it.
_TABULAR_PREFACTOR = 4.0 * np.pi


@dataclass(frozen=True)
class PopulationState:
    """Occupation expectation values n(Omega_j) for modes j = 1..N."""

    n: np.ndarray

    def __post_init__(self):
        n = _as_readonly(self.n)
        if n.ndim != 1:
            raise ValueError(f"occupations must be a vector, got shape {n.shape}")
        if not np.all(np.isfinite(n)):
            raise ValueError("occupations must be finite")
        if np.any(n < 0):
            raise ValueError("occupations must be >= 0")
        object.__setattr__(self, "n", n)

    @property
    def n_modes(self) -> int:
        return self.n.shape[0]

    def total_number(self) -> float:
        return float(np.sum(self.n))

    def total_energy(self) -> float:
        # reduced units: energy of mode j is j
        return float(np.sum(self.n * np.arange(1, self.n_modes + 1)))


@dataclass(frozen=True)
class SingleMode:
    """All population on one mode at tau = 0."""

    k_ini: int
    occupancy: float = 1.0

    def __post_init__(self):
        if self.k_ini < 1:
            raise ValueError(f"k_ini must be >= 1, got {self.k_ini}")
        if not (self.occupancy > 0):
            raise ValueError(f"occupancy must be > 0, got {self.occupancy}")

    def populations(self, ladder: ModeLadder) -> PopulationState:
        if self.k_ini > ladder.n_modes:
            raise ValueError(f"k_ini {self.k_ini} exceeds ladder size {ladder.n_modes}")
        n = np.zeros(ladder.n_modes)
        n[self.k_ini - 1] = self.occupancy
        return PopulationState(n)


@dataclass(frozen=True)
class Explicit:
    """Arbitrary initial occupation vector."""

    n: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", _as_readonly(self.n))

    def populations(self, ladder: ModeLadder) -> PopulationState:
        if self.n.shape != (ladder.n_modes,):
            raise ValueError(
                f"initial vector length {self.n.shape} does not match N = {ladder.n_modes}"
            )
        return PopulationState(self.n)


InitialCondition = Union[SingleMode, Explicit]


@dataclass(frozen=True)
class QuadraticCoupling:
    """Bilinear mode-mode coupling constants g_pq (diagonal ignored)."""

    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"g must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("g entries must be finite")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def n_modes(self) -> int:
        return self.g.shape[0]


def _check_mode(idx: int, n_modes: int, name: str) -> None:
    if not 1 <= idx <= n_modes:
        raise ValueError(f"{name} = {idx} outside 1..{n_modes}")


def kernel_gain(model: CouplingModel, j: int, k: int, ladder: ModeLadder) -> float:
    """Dimensionless gain weight 2 * (4 pi / hbar^2) nu0 |A_jk|^2 |B_{j+k}|^2.

    Zero when j + k exceeds the highest mode (truncation rule); symmetric
    under j <-> k.
    """
    n = ladder.n_modes
    _check_mode(j, n, "j")
    _check_mode(k, n, "k")
    if j + k > n:
        return 0.0
    if isinstance(model, ExponentialDecay):
        return float(2.0 * model._a2_pref(j, k) * (j + k))
    if isinstance(model, ConstantProduct):
        return 2.0 * model.c
    if isinstance(model, Tabular):
        _check_tabular_size(model, n)
        return float(2.0 * _TABULAR_PREFACTOR * model.a2[j - 1, k - 1] * model.b2[j + k - 1])
    raise TypeError(f"unknown coupling model {type(model).__name__}")


def kernel_loss(model: CouplingModel, j: int, k: int, ladder: ModeLadder) -> float:
    """Dimensionless loss weight (4 pi / hbar^2) nu0 |A_{k,j-k}|^2 |B_j|^2.

    Defined for 1 <= k <= j - 1.
    """
    n = ladder.n_modes
    _check_mode(j, n, "j")
    if not 1 <= k <= j - 1:
        raise ValueError(f"loss kernel needs 1 <= k <= j-1, got j={j}, k={k}")
    if isinstance(model, ExponentialDecay):
        return float(model._a2_pref(k, j - k) * j)
    if isinstance(model, ConstantProduct):
        return model.c
    if isinstance(model, Tabular):
        _check_tabular_size(model, n)
        return float(_TABULAR_PREFACTOR * model.a2[k - 1, j - k - 1] * model.b2[j - 1])
    raise TypeError(f"unknown coupling model {type(model).__name__}")


def _check_tabular_size(model: Tabular, n_modes: int) -> None:
    if model.n_modes != n_modes:
        raise ValueError(
            f"tabular kernel is {model.n_modes} x {model.n_modes}, ladder has N = {n_modes}"
        )


def gain_matrix(model: CouplingModel, ladder: ModeLadder) -> np.ndarray:
    """G[j-1, k-1] = kernel_gain(model, j, k), as one dense array."""
    n = ladder.n_modes
    jj, kk = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    if isinstance(model, ExponentialDecay):
        g = 2.0 * model._a2_pref(jj, kk) * model._b2(jj + kk, n)
    elif isinstance(model, ConstantProduct):
        g = np.full((n, n), 2.0 * model.c)
    elif isinstance(model, Tabular):
        _check_tabular_size(model, n)
        g = 2.0 * _TABULAR_PREFACTOR * model.a2 * model.b2[jj + kk - 1]
    else:
        raise TypeError(f"unknown coupling model {type(model).__name__}")
    g = np.where(jj + kk <= n, g, 0.0)
    return np.ascontiguousarray(g)


def loss_matrix(model: CouplingModel, ladder: ModeLadder) -> np.ndarray:
    """L[j-1, k-1] = kernel_loss(model, j, k) for k < j, zero elsewhere."""
    n = ladder.n_modes
    jj, kk = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    valid = kk < jj
    if isinstance(model, ExponentialDecay):
        # |A_{k, j-k}|^2 -> exponent |k - (j - k)| = |2k - j|
        l = model.gamma0 * np.exp(-model.gamma * np.abs(2 * kk - jj)) * jj
    elif isinstance(model, ConstantProduct):
        l = np.full((n, n), model.c)
    elif isinstance(model, Tabular):
        _check_tabular_size(model, n)
        qq = np.clip(jj - kk, 1, n)
        l = _TABULAR_PREFACTOR * model.a2[kk - 1, qq - 1] * model.b2[jj - 1]
    else:
        raise TypeError(f"unknown coupling model {type(model).__name__}")
    return np.ascontiguousarray(np.where(valid, l, 0.0))
