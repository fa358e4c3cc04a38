"""Spectral tools for a non-local wave operator on the slit (-1, 1).

The operator acts diagonally on Chebyshev coefficients while its physical-space
form is a singular integral; both routes are implemented and cross-checked.
On top of it sit a weak-form resolvent and eigenproblem, a conservative
time stepper for the second-order evolution, and an adjoint-based synthesizer
for interior control signals.
"""

from ._kernels import backend_name
from .chebyshev import ChebGrid, GridFunction, cheb_grid, to_coeffs, to_grid
from .control import (ControlResult, ControlSignal, ControlWindow, TargetState,
                      duality_gap, gradient_check, manufactured_target,
                      solve_adjoint, synthesize)
from .evolution import (LipschitzRhs, MidpointStepper, SourceRhs,
                        StepConvergenceError, VerletStepper, WaveState,
                        ZeroRhs, energy, simulate)
from .galerkin import (EigenDecomposition, GalerkinSystem, build_system,
                       eigenmodes, mass_matrix, solve_resolvent)
from .verify import CheckResult, run_checks
from .waveop import WaveOperator

__version__ = "0.1.0"

__all__ = [
    "ChebGrid", "GridFunction", "cheb_grid", "to_coeffs", "to_grid",
    "WaveOperator",
    "GalerkinSystem", "EigenDecomposition", "build_system", "mass_matrix",
    "solve_resolvent", "eigenmodes",
    "WaveState", "ZeroRhs", "LipschitzRhs", "SourceRhs", "MidpointStepper",
    "VerletStepper", "StepConvergenceError", "simulate", "energy",
    "ControlWindow", "ControlSignal", "TargetState", "ControlResult",
    "solve_adjoint", "duality_gap", "synthesize", "gradient_check",
    "manufactured_target",
    "CheckResult", "run_checks",
    "backend_name",
    "__version__",
]
