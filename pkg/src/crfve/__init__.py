"""
CRFVE Edge Schwarz
==================
Edge-based additive Schwarz preconditioned GMRES for the Crouzeix-Raviart
finite volume element discretization of -div(A grad u) = f on the unit
square with discontinuous coefficients.
"""

# re-export the main entry points from core
from .core import (
    # Mesh
    build_structured_mesh,
    enumerate_cr_dofs,
    build_control_volumes,
    build_partition,
    # Coefficients
    CoefficientField,
    make_oscillatory_coefficient,
    make_piecewise_constant,
    # Assembly
    AssembledSystem,
    assemble_fe,
    assemble_fv,
    assemble_rhs_fv,
    assemble_rhs_fe,
    assemble_system,
    energy_norm,
    form_discrepancy,
    # Problem
    Problem,
    build_problem,
    # Solver
    gmres,
    estimate_cp_Cp,
    SchwarzPreconditioner,
    setup,
    apply_T,
    compute_g,
    solve,
    # Errors
    CRFVEError,
    InvalidParameterError,
)

__version__ = '0.3.0'

__all__ = [
    'build_structured_mesh', 'enumerate_cr_dofs', 'build_control_volumes', 'build_partition',
    'CoefficientField', 'make_oscillatory_coefficient', 'make_piecewise_constant',
    'AssembledSystem', 'assemble_fe', 'assemble_fv', 'assemble_rhs_fv', 'assemble_rhs_fe',
    'assemble_system', 'energy_norm', 'form_discrepancy', 'Problem', 'build_problem',
    'gmres', 'estimate_cp_Cp', 'SchwarzPreconditioner', 'setup', 'apply_T', 'compute_g', 'solve',
    'CRFVEError', 'InvalidParameterError',
]
