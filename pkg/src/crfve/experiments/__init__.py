"""
CRFVE Edge Schwarz - Experiments Module
=======================================

Verification code for the discretization and solver claims.

Modules:
    - discretization: FV/FE identity, O(h) form discrepancy, FV coercivity
    - gmres_bound: GMRES residual bound with exact c_p, C_p
    - projections: Projection identities, minimal energy, rhs consistency
    - edge_energy: Logarithmic growth of edge-function energies
    - iteration_tables: Jump sweep and (h, H) iteration grids
"""

from .discretization import (
    verify_fv_fe_identity,
    verify_fv_fe_identity_single,
    verify_form_discrepancy_scaling,
    verify_fv_coercivity,
)

from .gmres_bound import (
    verify_residual_bound,
)

from .projections import (
    verify_projection_properties,
    verify_operator_spd,
    verify_minimal_energy,
    verify_rhs_consistency,
)

from .edge_energy import (
    edge_energy,
    verify_edge_energy_growth,
)

from .iteration_tables import (
    TABLE_JUMPS,
    TABLE_FREQ10,
    TABLE_FREQ100,
    GRID_NS,
    GRID_MS,
    grid_cells,
    grid_table,
    format_grid,
    run_cell,
    verify_jump_robustness,
    verify_constant_ratio,
    verify_polylog_growth,
    verify_oscillatory,
)

__all__ = [
    # Discretization
    'verify_fv_fe_identity',
    'verify_fv_fe_identity_single',
    'verify_form_discrepancy_scaling',
    'verify_fv_coercivity',
    # GMRES bound
    'verify_residual_bound',
    # Projections
    'verify_projection_properties',
    'verify_operator_spd',
    'verify_minimal_energy',
    'verify_rhs_consistency',
    # Edge energy
    'edge_energy',
    'verify_edge_energy_growth',
    # Iteration tables
    'TABLE_JUMPS',
    'TABLE_FREQ10',
    'TABLE_FREQ100',
    'GRID_NS',
    'GRID_MS',
    'grid_cells',
    'grid_table',
    'format_grid',
    'run_cell',
    'verify_jump_robustness',
    'verify_constant_ratio',
    'verify_polylog_growth',
    'verify_oscillatory',
]
