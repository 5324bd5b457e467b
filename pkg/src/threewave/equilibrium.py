"""Bose-Einstein distributions, energy bookkeeping and the temperature solver.

In reduced units the mode energies are the indices j = 1..N, so the thermal
occupation is n_B(j) = 1/(exp(beta*j) - 1) with beta the inverse temperature
in units of 1/(hbar * delta_omega).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .model import InitialCondition, ModeLadder, PopulationState

__all__ = [
    "EquilibriumSolution",
    "bose_einstein",
    "check_be_identities",
    "initial_energy",
    "final_energy",
    "final_energy_approx",
    "solve_beta",
    "beta_approx",
]

# largest beta considered during bracket expansion; below the corresponding
# energy floor and above the small-beta cap the target is rejected
_BRACKET_EXPANSIONS = 600


@dataclass(frozen=True)
class EquilibriumSolution:
    beta: float
    u_target: float
    populations: PopulationState
    method: str  # "exact-sum" | "integral-approx"

    def __post_init__(self):
        if not (self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.method not in ("exact-sum", "integral-approx"):
            raise ValueError(f"unknown method tag {self.method!r}")


def _check_beta(beta: float) -> None:
    if not (beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")


def bose_einstein(beta: float, ladder: ModeLadder) -> PopulationState:
    """n_B over the ladder, via expm1 so small beta*j keeps full precision."""
    _check_beta(beta)
    x = beta * np.arange(1, ladder.n_modes + 1, dtype=float)
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(x)
    n[~np.isfinite(n)] = 0.0  # expm1 overflow means occupation underflows
    return PopulationState(n)


def bose_einstein_scalar(beta: float, j: int) -> float:
    _check_beta(beta)
    x = beta * j
    if x > 709.0:
        return 0.0
    return 1.0 / np.expm1(x)


def check_be_identities(beta: float, j: int, k: int) -> Tuple[float, float]:
    """Relative residuals of the two closure identities of n_B.

    Sum identity:        n_B(j+k) = n_B(j) n_B(k) / [1 + n_B(j) + n_B(k)]
    Difference identity: n_B(j-k) = n_B(j) [1 + n_B(k)] / [n_B(k) - n_B(j)]

    The difference n_B(k) - n_B(j) is evaluated in the rearranged form
    n_B(j) [1 + n_B(k)] expm1(beta (j - k)) to avoid cancellation for
    j close to k.  Requires j > k >= 1.
    """
    _check_beta(beta)
    if not (j > k >= 1):
        raise ValueError(f"difference identity needs j > k >= 1, got j={j}, k={k}")
    nj = bose_einstein_scalar(beta, j)
    nk = bose_einstein_scalar(beta, k)

    lhs_sum = bose_einstein_scalar(beta, j + k)
    rhs_sum = nj * nk / (1.0 + nj + nk)
    res_sum = abs(rhs_sum - lhs_sum) / lhs_sum if lhs_sum != 0.0 else abs(rhs_sum)

    lhs_diff = bose_einstein_scalar(beta, j - k)
    diff = nk - nj
    if not diff > 1e-3 * nk:
        # fewer than ~3 safe digits in the direct subtraction: rearrange
        diff = nj * (1.0 + nk) * np.expm1(beta * (j - k))
    rhs_diff = nj * (1.0 + nk) / diff
    res_diff = abs(rhs_diff - lhs_diff) / lhs_diff
    return float(res_sum), float(res_diff)


def initial_energy(ic: InitialCondition, ladder: ModeLadder) -> float:
    """U_ini = sum_j N_j^(ini) * j in reduced units."""
    return ic.populations(ladder).total_energy()


def final_energy(beta: float, ladder: ModeLadder) -> float:
    """U_fin = sum_{j=1}^N j / (exp(beta*j) - 1), summed ascending in j."""
    _check_beta(beta)
    j = np.arange(1, ladder.n_modes + 1, dtype=float)
    with np.errstate(over="ignore"):
        terms = j / np.expm1(beta * j)
    terms[~np.isfinite(terms)] = 0.0
    return float(np.add.reduce(terms))


def final_energy_approx(beta: float) -> float:
    """Continuum approximation U_fin ~ pi^2 / (6 beta^2)."""
    _check_beta(beta)
    return np.pi**2 / (6.0 * beta * beta)


def beta_approx(k_ini: int) -> float:
    """Inverse temperature pi / sqrt(6 k_ini) for a single excitation on k_ini."""
    if k_ini < 1:
        raise ValueError(f"k_ini must be >= 1, got {k_ini}")
    return np.pi / np.sqrt(6.0 * k_ini)


def solve_beta(u_target: float, ladder: ModeLadder, tol: float = 1e-12) -> EquilibriumSolution:
    """Invert U_fin(beta) = u_target on the strictly monotone exact sum.

    Bracketing starts from the continuum inverse beta0 = pi / sqrt(6 u) and
    expands geometrically until the sign changes, then bisects until
    |U_fin(beta) - u_target| <= tol * u_target.
    """
    if not (u_target > 0) or not np.isfinite(u_target):
        raise ValueError(f"u_target must be positive and finite, got {u_target}")
    if not (tol > 0):
        raise ValueError(f"tol must be positive, got {tol}")

    def f(beta: float) -> float:
        return final_energy(beta, ladder) - u_target

    beta0 = np.pi / np.sqrt(6.0 * u_target)
    lo = hi = beta0
    f0 = f(beta0)
    if f0 > 0:  # energy too high at beta0: move to larger beta (colder)
        for _ in range(_BRACKET_EXPANSIONS):
            hi *= 2.0
            if f(hi) <= 0:
                break
        else:
            raise ValueError(f"could not bracket beta for u_target = {u_target}")
    elif f0 < 0:
        for _ in range(_BRACKET_EXPANSIONS):
            lo /= 2.0
            if f(lo) >= 0:
                break
        else:
            raise ValueError(
                f"u_target = {u_target} exceeds the energy representable on an "
                f"N = {ladder.n_modes} ladder at the smallest usable beta {lo:.3g}"
            )

    beta = 0.5 * (lo + hi)
    for _ in range(2000):
        r = f(beta)
        if abs(r) <= tol * u_target:
            break
        if r > 0:
            lo = beta
        else:
            hi = beta
        beta_next = 0.5 * (lo + hi)
        if beta_next == beta:
            break  # bisection exhausted machine precision
        beta = beta_next
    else:
        raise RuntimeError("bisection failed to converge")
    if abs(f(beta)) > tol * u_target:
        raise ValueError(
            f"no beta meets |U_fin - u| <= {tol:g} * u for u_target = {u_target}"
        )

    return EquilibriumSolution(
        beta=beta,
        u_target=u_target,
        populations=bose_einstein(beta, ladder),
        method="exact-sum",
    )
