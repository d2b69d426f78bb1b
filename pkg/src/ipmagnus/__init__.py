"""Magnus integrators for the interaction-picture Schrodinger equation.

The package builds the periodic finite-difference model ``H = A + B`` with
``A = -Laplacian/2`` and ``B = V(x)``, the interaction-picture generator
``H_I(t) = exp(iAt) B exp(-iAt)``, truncated Magnus propagators of arbitrary
order, and a harness that measures nested-commutator and Magnus error
scaling by log-log slope fits.
"""

from ipmagnus.linalg import (
    commutator,
    expm_antihermitian,
    herm_eig,
    matmul,
    spectral_norm,
)
from ipmagnus.discretize import (
    Grid1D,
    InteractionOracle,
    KineticOperator,
    PotentialSpec,
    build_kinetic,
    build_potential,
)
from ipmagnus.magnus import (
    MagnusStepConfig,
    compose_global,
    magnus_step,
    omega_n,
    omega_reference,
    time_ordered_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "Grid1D",
    "InteractionOracle",
    "KineticOperator",
    "MagnusStepConfig",
    "PotentialSpec",
    "build_kinetic",
    "build_potential",
    "commutator",
    "compose_global",
    "expm_antihermitian",
    "herm_eig",
    "magnus_step",
    "matmul",
    "omega_n",
    "omega_reference",
    "spectral_norm",
    "time_ordered_oracle",
]
