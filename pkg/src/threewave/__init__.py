"""Kinetic simulation of thermalization in a multimode cavity via three-wave mixing."""

from .equilibrium import (
    EquilibriumSolution,
    beta_approx,
    bose_einstein,
    check_be_identities,
    final_energy,
    final_energy_approx,
    initial_energy,
    solve_beta,
)
from .kinetics import (
    IntegratorSettings,
    KineticOperator,
    StepUnderflowError,
    Trajectory,
    integrate,
    jacobian_diag,
    rhs,
    rhs_quadratic,
    stationarity_scale,
)
from .model import (
    ConstantProduct,
    CouplingModel,
    Explicit,
    ExponentialDecay,
    InitialCondition,
    ModeLadder,
    PopulationState,
    QuadraticCoupling,
    SingleMode,
    Tabular,
    gain_matrix,
    kernel_gain,
    kernel_loss,
    loss_matrix,
    make_ladder,
)
from .stability import PerturbationReport, StabilitySpectrum, kappa, perturbation_decay

__version__ = "0.1.0"
