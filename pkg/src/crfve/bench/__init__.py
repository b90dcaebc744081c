"""
CRFVE Edge Schwarz - Bench Module
=================================

Experiment driver:
    - config: ExperimentConfig with JSON/preset/flag resolution
    - runner: run, run_table, emit_residual_plot_data
    - verify: Named property checks with a pass/fail report
    - cli: The crfve-bench command
"""

from .config import ExperimentConfig, load_config

from .runner import (
    CSV_HEADER,
    PLOT_KINDS,
    Report,
    run,
    run_sweep,
    run_table,
    table_csv,
    alpha_sweep,
    grid_sweep,
    is_valid_cell,
    emit_residual_plot_data,
    emit_sweep_plot_data,
    history_is_monotone,
)

from .verify import (
    CHECKS,
    DEFAULT_CHECKS,
    check_fe_symmetry,
    check_direct_agreement,
    run_verify,
    format_report,
    write_report,
)

__all__ = [
    # Config
    'ExperimentConfig',
    'load_config',
    # Runner
    'CSV_HEADER',
    'PLOT_KINDS',
    'Report',
    'run',
    'run_sweep',
    'run_table',
    'table_csv',
    'alpha_sweep',
    'grid_sweep',
    'is_valid_cell',
    'emit_residual_plot_data',
    'emit_sweep_plot_data',
    'history_is_monotone',
    # Verify
    'CHECKS',
    'DEFAULT_CHECKS',
    'check_fe_symmetry',
    'check_direct_agreement',
    'run_verify',
    'format_report',
    'write_report',
]
