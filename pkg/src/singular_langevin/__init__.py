"""Langevin dynamics with singular power-law potentials.

Submodules
----------
potential    potential family, scaling map, Hamiltonian
orbit        turning points, orbit averages, Lambda(eta), eta*
lyapunov     Poisson-equation correction Psi, V = H + Psi, drift certificates
simulate     adaptive BAOAB / Euler-Maruyama integrators and ensembles
diagnostics  decay fits, Gibbs comparison, exponential moments, minorization
cli          config-driven experiment runner
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .potential import (  # noqa: F401
    FullState,
    LangevinParams,
    PotentialSpec,
    eval_curvature,
    eval_force,
    eval_hamiltonian,
    eval_potential,
    scale_map,
    validate_spec,
)
from .orbit import LambdaTable, eta_star, lambda_star, orbit_average, orbit_geometry, turning_points  # noqa: F401
from .simulate import IntegratorSettings, integrate_full, integrate_reduced, simulate_ensemble  # noqa: F401
