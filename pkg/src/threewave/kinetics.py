"""Right-hand side of the three-wave kinetic equation and its integrator.

The rate for mode j has a gain sum over down-conversion partners (j, k) ->
j + k and a loss sum over splittings j -> k + (j - k):

    dn_j/dtau =   sum_k G[j,k] * [ n_{j+k} (1 + n_j + n_k) - n_j n_k ]
                - sum_{k<j} L[j,k] * [ n_j (1 + n_k + n_{j-k}) - n_k n_{j-k} ]

with the kernel weights G, L from the model module.  Because
G[j,k] = 2 L[j+k,k], the analytic flow conserves total energy sum_j j n_j
exactly; any drift in an integrated trajectory is integrator error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .model import (
    CouplingModel,
    InitialCondition,
    ModeLadder,
    PopulationState,
    QuadraticCoupling,
    gain_matrix,
    loss_matrix,
)

__all__ = [
    "IntegratorSettings",
    "Trajectory",
    "KineticOperator",
    "rhs",
    "rhs_quadratic",
    "jacobian_diag",
    "integrate",
    "stationarity_scale",
    "StepUnderflowError",
]

# occupations smaller than this are flushed to zero after each accepted step
UNDERFLOW_FLOOR = 1e-300


class StepUnderflowError(RuntimeError):
    """Adaptive step fell below min_step (problem too stiff for the pair)."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Step-control parameters.

    The default abs_tol is far below any occupation of interest on purpose:
    equilibrium tails span tens of decades, and a loose absolute floor lets
    step-size control ignore (and thereby corrupt) exactly the modes the
    asymptotic distribution is read off from.  Tightening abs_tol forces the
    stepper to resolve those modes relative to their own size.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-50
    max_step: float = 1.0
    min_step: float = 1e-12
    record_every: float = 1.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.min_step < self.max_step):
            raise ValueError("need 0 < min_step < max_step")
        if not (self.record_every > 0):
            raise ValueError("record_every must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Recorded states with per-time energy/number diagnostics."""

    taus: np.ndarray
    states: np.ndarray  # shape (n_times, N)
    energies: np.ndarray
    numbers: np.ndarray
    step_sizes: np.ndarray  # step size in use when each record was taken

    def __post_init__(self):
        for name in ("taus", "states", "energies", "numbers", "step_sizes"):
            getattr(self, name).setflags(write=False)

    @property
    def n_times(self) -> int:
        return self.taus.shape[0]

    def state(self, i: int) -> PopulationState:
        return PopulationState(self.states[i])

    def final_state(self) -> PopulationState:
        return PopulationState(self.states[-1])


class KineticOperator:
    """Precomputed kernel matrices for repeated rhs evaluations.

    Instances reuse internal scratch buffers, so a single operator must not
    be shared between concurrently running integrations; give each
    trajectory its own operator (they are cheap relative to one run).
    """

    def __init__(self, model: CouplingModel, ladder: ModeLadder):
        self.ladder = ladder
        n = ladder.n_modes
        self.gain = gain_matrix(model, ladder)
        self.loss = loss_matrix(model, ladder)
        self._loss_row = self.loss.sum(axis=1)
        self._modes = np.arange(1, n + 1, dtype=float)
        # scratch: _ext[N:2N] mirrors the state for the n_{j+k} view,
        # _ext[3N:4N] for the n_{j-k} view; zero padding around both
        self._ext = np.zeros(4 * n)
        itemsize = self._ext.itemsize
        self._sum_view = np.lib.stride_tricks.as_strided(
            self._ext[n + 1 :], shape=(n, n), strides=(itemsize, itemsize)
        )
        self._diff_view = np.lib.stride_tricks.as_strided(
            self._ext[3 * n - 1 :], shape=(n, n), strides=(itemsize, -itemsize)
        )

    def _load(self, n: np.ndarray) -> None:
        N = self.ladder.n_modes
        if n.shape != (N,):
            raise ValueError(f"state length {n.shape} does not match N = {N}")
        self._ext[N : 2 * N] = n
        self._ext[3 * N :] = n

    def rhs(self, n: np.ndarray) -> np.ndarray:
        self._load(n)
        P = self._sum_view  # P[j-1, k-1] = n_{j+k} (zero beyond the ladder)
        D = self._diff_view  # D[j-1, k-1] = n_{j-k} (zeros where k >= j)
        gain = (1.0 + n) * np.einsum("jk,jk->j", self.gain, P) + np.einsum(
            "jk,jk,k->j", self.gain, P, n
        )
        gain -= n * (self.gain @ n)
        loss = n * (
            self._loss_row + self.loss @ n + np.einsum("jk,jk->j", self.loss, D)
        ) - np.einsum("jk,jk,k->j", self.loss, D, n)
        return gain - loss

    def jacobian_diag(self, n: np.ndarray) -> np.ndarray:
        """Analytic d(rhs_j)/d(n_j); the k = j gain term carries weight 2."""
        self._load(n)
        diff = self._sum_view - n[np.newaxis, :]
        gain = (self.gain * diff).sum(axis=1) + np.diagonal(self.gain) * np.diagonal(diff)
        loss = self._loss_row + self.loss @ n + (self.loss * self._diff_view).sum(axis=1)
        return gain - loss

    def energy(self, n: np.ndarray) -> float:
        return float(self._modes @ n)

    def max_kernel(self) -> float:
        return float(max(self.gain.max(), self.loss.max()))

    def bracket_magnitude(self, n: np.ndarray) -> float:
        """Largest sum of absolute bracket addends; sets the rounding scale
        against which a residual of rhs at a fixed point should be judged."""
        self._load(n)
        P = self._sum_view
        D = self._diff_view
        nj = n[:, np.newaxis]
        nk = n[np.newaxis, :]
        gain_mag = P + nj * P + nk * P + nj * nk
        loss_mag = np.where(self.loss > 0, nj + nj * nk + nj * D + nk * D, 0.0)
        return float(max(gain_mag.max(), loss_mag.max()))


def stationarity_scale(
    state: PopulationState, model: CouplingModel, ladder: ModeLadder
) -> float:
    """max kernel value times max bracket magnitude for the given state."""
    op = KineticOperator(model, ladder)
    return op.max_kernel() * op.bracket_magnitude(state.n)


def rhs(state: PopulationState, model: CouplingModel, ladder: ModeLadder) -> np.ndarray:
    """One-shot evaluation of dn/dtau; builds the kernel matrices each call."""
    return KineticOperator(model, ladder).rhs(state.n)


def jacobian_diag(
    state: PopulationState, model: CouplingModel, ladder: ModeLadder
) -> np.ndarray:
    return KineticOperator(model, ladder).jacobian_diag(state.n)


def rhs_quadratic(
    state: PopulationState, q: QuadraticCoupling, ladder: ModeLadder
) -> np.ndarray:
    """Rate vector for bilinear coupling: identically zero on an equidistant ladder.

    The resonance condition Omega_p = Omega_j keeps only p = j (discrete
    delta realized as nu0 * delta_pj), and that term carries the exact factor
    n_p - n_j = 0.  Computed term by term so the zeros are exact.
    """
    N = ladder.n_modes
    if q.n_modes != N:
        raise ValueError(f"coupling is {q.n_modes} x {q.n_modes}, ladder has N = {N}")
    n = state.n
    if n.shape != (N,):
        raise ValueError(f"state length {n.shape} does not match N = {N}")
    weights = 2.0 * np.pi * (q.g + q.g.T) ** 2 * ladder.density_of_modes
    delta = np.eye(N)
    return (weights * delta * (n[np.newaxis, :] - n[:, np.newaxis])).sum(axis=1)


# Dormand-Prince 5(4) pair: 5th-order solution propagated, embedded 4th-order
# result provides the local error estimate (FSAL: stage 7 = next step's stage 1).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_ERR = _DP_B5 - _DP_B4


def integrate(
    ic: InitialCondition,
    model: Union[CouplingModel, QuadraticCoupling],
    ladder: ModeLadder,
    tau_end: float,
    settings: Optional[IntegratorSettings] = None,
) -> Trajectory:
    """Adaptive explicit trajectory from tau = 0 to tau_end.

    Steps are clipped to land exactly on the record_every output grid.  A
    candidate step driving any occupation below -abs_tol is rejected and the
    step halved; residual negatives within [-abs_tol, 0] are clamped to zero
    after acceptance, and occupations below the underflow floor are flushed.
    """
    if settings is None:
        settings = IntegratorSettings()
    if tau_end < 0:
        raise ValueError(f"tau_end must be >= 0, got {tau_end}")

    if isinstance(model, QuadraticCoupling):
        op_rhs = lambda y: rhs_quadratic(PopulationState(np.maximum(y, 0.0)), model, ladder)
        energy = lambda y: float(np.arange(1, ladder.n_modes + 1) @ y)
    else:
        op = KineticOperator(model, ladder)
        op_rhs = op.rhs
        energy = op.energy

    y = ic.populations(ladder).n.copy()
    tau = 0.0

    taus = [0.0]
    states = [y.copy()]
    energies = [energy(y)]
    numbers = [float(y.sum())]
    h = min(settings.max_step, settings.record_every, 1e-2 if tau_end > 0 else 1.0)
    step_sizes = [h]

    if tau_end == 0:
        return _freeze(taus, states, energies, numbers, step_sizes)

    next_record = min(settings.record_every, tau_end)
    f0 = op_rhs(y)
    k = np.empty((7, y.shape[0]))
    k[0] = f0

    while tau < tau_end:
        h = min(h, settings.max_step, tau_end - tau)
        h_clip = min(h, next_record - tau)
        if h_clip <= 0:
            h_clip = h  # guards against roundoff at a record boundary
        # stages (k[0] already holds f(tau, y) via FSAL)
        for i in range(1, 7):
            yi = y + h_clip * (_DP_A[i] @ k[:i])
            k[i] = op_rhs(yi)
        y_new = y + h_clip * (_DP_B5 @ k)
        err = h_clip * (_DP_ERR @ k)
        scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))

        reject = err_norm > 1.0 or not np.all(np.isfinite(y_new))
        if not reject and np.min(y_new) < -settings.abs_tol:
            # positivity violation: retry at half step regardless of error
            h = h_clip / 2
            if h < settings.min_step:
                raise StepUnderflowError(
                    f"step underflow at tau = {tau:.6g} (positivity rejection)"
                )
            continue
        if reject:
            if not np.all(np.isfinite(y_new)):
                factor = 0.25
            else:
                factor = max(0.2, 0.9 * err_norm ** -0.2)
            h = h_clip * factor
            if h < settings.min_step:
                raise StepUnderflowError(
                    f"step underflow at tau = {tau:.6g} (stiffness failure, "
                    f"error norm {err_norm:.3g})"
                )
            continue

        # accept
        tau = tau + h_clip
        clamped = bool(np.min(y_new) < 0.0) or bool(
            np.any((y_new > 0.0) & (y_new < UNDERFLOW_FLOOR))
        )
        np.clip(y_new, 0.0, None, out=y_new)
        y_new[y_new < UNDERFLOW_FLOOR] = 0.0
        y = y_new
        if clamped:
            k[0] = op_rhs(y)  # clamping invalidates the FSAL stage
        else:
            k[0] = k[6].copy()

        if tau >= next_record - 1e-12 * max(1.0, tau):
            taus.append(tau)
            states.append(y.copy())
            energies.append(energy(y))
            numbers.append(float(y.sum()))
            step_sizes.append(h_clip)
            next_record = min(next_record + settings.record_every, tau_end)

        if err_norm == 0.0:
            h = h_clip * 5.0
        else:
            h = h_clip * min(5.0, max(0.2, 0.9 * err_norm ** -0.2))

    return _freeze(taus, states, energies, numbers, step_sizes)


def _freeze(taus, states, energies, numbers, step_sizes) -> Trajectory:
    return Trajectory(
        taus=np.array(taus),
        states=np.array(states),
        energies=np.array(energies),
        numbers=np.array(numbers),
        step_sizes=np.array(step_sizes),
    )
