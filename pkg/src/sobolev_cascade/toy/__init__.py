"""The N-generation toy model: exact Hamiltonian, integration, reduction, cascade."""
from .cascade import CascadeResult, cascade, cascade_initial_state, fit_stage_times, unstable_phase
from .dynamics import ToyParams, Trajectory, integrate, mass, vector_field
from .polynomial import (CompiledHamiltonian, PolyHamiltonian, brute_force_coefficients,
                         compile_hamiltonian, derive_hamiltonian, leading_order_hamiltonian)
from .reduction import ReducedSystem, Separatrix, critical_point, reduce_two_generation, separatrix

__all__ = [
    "CascadeResult", "CompiledHamiltonian", "PolyHamiltonian", "ReducedSystem", "Separatrix",
    "ToyParams", "Trajectory", "brute_force_coefficients", "cascade", "cascade_initial_state",
    "compile_hamiltonian", "critical_point", "derive_hamiltonian", "fit_stage_times",
    "integrate", "leading_order_hamiltonian", "mass", "reduce_two_generation", "separatrix",
    "unstable_phase", "vector_field",
]
