"""
CRFVE Edge Schwarz - Core Module
================================

Numerical building blocks:

Mesh (mesh):
    - build_structured_mesh: Uniform triangulation of the unit square
    - enumerate_cr_dofs: One Crouzeix-Raviart dof per edge
    - build_control_volumes: Dual mesh of edge control volumes
    - build_partition: m x m square subdomains and their interfaces

Coefficients (coefficient):
    - CoefficientField: alpha_k * base(x) per subdomain
    - make_oscillatory_coefficient, PRESETS: Jump/oscillation test fields

Assembly (assembly):
    - assemble_fe, assemble_fv: Symmetric FE and nonsymmetric FV matrices
    - assemble_rhs_fv, assemble_rhs_fe: Load vectors
    - energy_norm, broken_h1_seminorm, form_discrepancy

Linear algebra (linalg):
    - factorize: Dense/sparse direct sub-block factorizations
    - gmres: Full GMRES in a given inner product
    - estimate_cp_Cp: Hessenberg estimates of the convergence parameters

Problem (problem):
    - build_problem: Mesh, partition and assemble one (n, m) instance

Schwarz (schwarz):
    - setup: Edge-based additive Schwarz operator, variants sym/nsym
    - apply_T, compute_g, solve
"""

from .errors import (
    CRFVEError,
    InvalidParameterError,
    SingularGeometryError,
    MatrixNotPSDError,
    InsufficientDataError,
    FactorizationError,
    SchwarzSetupError,
    StageError,
)

from .mesh import (
    DIAGONALS,
    TriMesh,
    DofMap,
    DualMesh,
    ControlVolumeSegment,
    Interface,
    Partition,
    build_structured_mesh,
    enumerate_cr_dofs,
    build_control_volumes,
    build_partition,
    mesh_invariants,
    partition_invariants,
    mesh_counts,
    dump_mesh,
)

from .coefficient import (
    CoefficientField,
    make_oscillatory_coefficient,
    make_piecewise_constant,
    red_multipliers,
    preset_mask,
    PRESETS,
)

from .assembly import (
    AssembledSystem,
    cr_gradients,
    local_cr_stiffness,
    assemble_fe,
    assemble_fv,
    assemble_rhs_fv,
    assemble_rhs_fe,
    assemble_system,
    solve_fe_direct,
    solve_fv_direct,
    energy_norm,
    broken_h1_seminorm,
    form_discrepancy,
    fv_coercivity_constant,
)

from .linalg import (
    Factorization,
    KrylovTrace,
    to_csr,
    is_canonical_csr,
    dump_matrix,
    factorize,
    solve_with_factor,
    gmres,
    estimate_cp_Cp,
    dense_operator_matrix,
    energy_cp_Cp,
    residual_bound,
)

from .problem import (
    Problem,
    make_coefficient,
    build_problem,
)

from .schwarz import (
    EdgeBasis,
    EdgeBlock,
    Subspace,
    SchwarzPreconditioner,
    harmonic_extension,
    build_edge_basis,
    setup,
    apply_T,
    compute_g,
    solve,
    VARIANTS,
    MONITORS,
)

__all__ = [
    # Errors
    'CRFVEError',
    'InvalidParameterError',
    'SingularGeometryError',
    'MatrixNotPSDError',
    'InsufficientDataError',
    'FactorizationError',
    'SchwarzSetupError',
    'StageError',
    # Mesh
    'DIAGONALS',
    'TriMesh',
    'DofMap',
    'DualMesh',
    'ControlVolumeSegment',
    'Interface',
    'Partition',
    'build_structured_mesh',
    'enumerate_cr_dofs',
    'build_control_volumes',
    'build_partition',
    'mesh_invariants',
    'partition_invariants',
    'mesh_counts',
    'dump_mesh',
    # Coefficients
    'CoefficientField',
    'make_oscillatory_coefficient',
    'make_piecewise_constant',
    'red_multipliers',
    'preset_mask',
    'PRESETS',
    # Assembly
    'AssembledSystem',
    'cr_gradients',
    'local_cr_stiffness',
    'assemble_fe',
    'assemble_fv',
    'assemble_rhs_fv',
    'assemble_rhs_fe',
    'assemble_system',
    'solve_fe_direct',
    'solve_fv_direct',
    'energy_norm',
    'broken_h1_seminorm',
    'form_discrepancy',
    'fv_coercivity_constant',
    # Linear algebra
    'Factorization',
    'KrylovTrace',
    'to_csr',
    'is_canonical_csr',
    'dump_matrix',
    'factorize',
    'solve_with_factor',
    'gmres',
    'estimate_cp_Cp',
    'dense_operator_matrix',
    'energy_cp_Cp',
    'residual_bound',
    # Problem
    'Problem',
    'make_coefficient',
    'build_problem',
    # Schwarz
    'EdgeBasis',
    'EdgeBlock',
    'Subspace',
    'SchwarzPreconditioner',
    'harmonic_extension',
    'build_edge_basis',
    'setup',
    'apply_T',
    'compute_g',
    'solve',
    'VARIANTS',
    'MONITORS',
]
