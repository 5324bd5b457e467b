"""Linear-stability decay spectrum around the Bose-Einstein fixed point.

kappa_j is the (negated) diagonal of the kinetic Jacobian evaluated at n_B:
a small single-mode deviation obeys d(dn_j)/dtau = -kappa_j dn_j to leading
order.  Off-diagonal couplings exist, so the dynamically fitted rate of a
full nonlinear perturbation only tracks kappa_j approximately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .equilibrium import bose_einstein, solve_beta
from .kinetics import IntegratorSettings, KineticOperator, integrate
from .model import CouplingModel, Explicit, ModeLadder

__all__ = ["StabilitySpectrum", "PerturbationReport", "kappa", "perturbation_decay"]


@dataclass(frozen=True)
class StabilitySpectrum:
    kappa: np.ndarray
    beta: float

    def __post_init__(self):
        self.kappa.setflags(write=False)


def kappa(beta: float, model: CouplingModel, ladder: ModeLadder) -> StabilitySpectrum:
    """Decay rates kappa_j of small deviations around n_B(beta).

    Assembled from the kernel matrices and the closed thermal forms
        gain term:  n_k (1 + n_k) / (1 + n_j + n_k)
        loss term:  n_k (1 + n_k) / (n_k - n_j)
    with the thermal difference n_k - n_j rewritten via expm1 ratios so large
    beta*j cannot overflow or cancel.  The self-coupling term k = j of the
    gain sum carries weight 2 (the bracket is quadratic in n_j), which is
    what makes kappa match the analytic Jacobian diagonal exactly.
    """
    if not (beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")
    op = KineticOperator(model, ladder)
    N = ladder.n_modes
    n = bose_einstein(beta, ladder).n

    nj = n[:, np.newaxis]
    nk = n[np.newaxis, :]
    gain_term = nk * (1.0 + nk) / (1.0 + nj + nk)
    gain = (op.gain * gain_term).sum(axis=1) + np.diagonal(op.gain) * np.diagonal(
        gain_term
    )

    # loss term n_k (1+n_k) / (n_k - n_j) for k < j, as
    # (1 + n_k) * expm1(-beta j) / expm1(-beta (j - k))  (both factors < 0)
    idx = np.arange(1, N + 1, dtype=float)
    em_j = np.expm1(-beta * idx)[:, np.newaxis]
    jk = idx[:, np.newaxis] - idx[np.newaxis, :]
    # overflow only happens at jk < 0, which the mask below discards
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        loss_term = (1.0 + nk) * em_j / np.expm1(-beta * jk)
    loss_term = np.where(jk > 0, loss_term, 0.0)
    loss = (op.loss * loss_term).sum(axis=1)

    return StabilitySpectrum(kappa=gain + loss, beta=beta)


@dataclass(frozen=True)
class PerturbationReport:
    mode: int
    amplitude: float
    beta: float
    beta_matched: float  # beta' solving U_fin = U of the perturbed state
    kappa_mode: float
    fitted_rate: Optional[float]  # None when the perturbation never decays
    terminal_distance: float  # max-norm distance to n_B(beta_matched)
    tau_end: float


def perturbation_decay(
    beta: float,
    model: CouplingModel,
    ladder: ModeLadder,
    mode: int,
    amplitude: float,
    tau_end: float,
    settings: Optional[IntegratorSettings] = None,
) -> PerturbationReport:
    """Kick one mode of n_B(beta) by a relative amplitude and relax it.

    Integrates the full nonlinear kinetics.  The perturbation shifts the
    conserved energy, so the relaxation target is n_B(beta') with beta'
    re-solved from the perturbed energy, not the original beta.  The decay
    rate is a least-squares slope of log|dn_mode(tau)| over the first e-fold,
    skipping the tau < 1 transient.
    """
    if abs(amplitude) > 0.1:
        raise ValueError(f"|amplitude| must be <= 0.1, got {amplitude}")
    ladder._check_index(mode)
    n0 = bose_einstein(beta, ladder).n.copy()
    if n0[mode - 1] == 0.0:
        raise ValueError(f"n_B underflows on mode {mode} at beta = {beta}")
    n0[mode - 1] *= 1.0 + amplitude

    u = float(n0 @ np.arange(1, ladder.n_modes + 1))
    matched = solve_beta(u, ladder)
    target = matched.populations.n

    if settings is None:
        settings = IntegratorSettings(record_every=min(0.25, tau_end / 8 or 0.25))
    traj = integrate(Explicit(n0), model, ladder, tau_end, settings)

    spec = kappa(beta, model, ladder)
    k_mode = float(spec.kappa[mode - 1])

    if amplitude == 0.0:
        fitted = None  # nothing to relax, any residual is solver noise
    else:
        delta = traj.states[:, mode - 1] - target[mode - 1]
        fitted = _fit_decay_rate(traj.taus, delta)

    terminal = float(np.max(np.abs(traj.states[-1] - target)))
    return PerturbationReport(
        mode=mode,
        amplitude=amplitude,
        beta=beta,
        beta_matched=matched.beta,
        kappa_mode=k_mode,
        fitted_rate=fitted,
        terminal_distance=terminal,
        tau_end=tau_end,
    )


def _fit_decay_rate(taus: np.ndarray, delta: np.ndarray) -> Optional[float]:
    """Slope of -log|delta| over the first e-fold after the tau < 1 transient."""
    start = np.searchsorted(taus, 1.0)
    if start >= taus.shape[0]:
        return None
    d0 = abs(delta[start])
    if d0 == 0.0:
        return None
    window = [start]
    for i in range(start + 1, taus.shape[0]):
        if abs(delta[i]) <= d0 / np.e:
            break
        window.append(i)
    if len(window) < 2:
        return None
    t = taus[window]
    y = np.log(np.abs(delta[window]))
    slope = np.polyfit(t, y, 1)[0]
    return float(-slope)
