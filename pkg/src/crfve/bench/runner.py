"""
CRFVE Edge Schwarz - Experiment Runner
======================================

Pipeline of one run:  mesh -> assemble -> setup -> solve

Failures are re-raised as StageError naming the stage. Sweeps run their
cells in a process pool and emit rows in sweep order.
"""

import csv
import io
import json
import logging
import multiprocessing
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..core import (InvalidParameterError, StageError, assemble_system, build_control_volumes,
                    build_partition, build_structured_mesh, energy_norm, enumerate_cr_dofs,
                    make_coefficient, setup, solve, solve_fe_direct, solve_fv_direct)
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

CSV_HEADER = ["n", "m", "freq", "alpha1", "variant", "iters", "cp_est", "Cp_est", "seconds"]


@dataclass
class Report:
    """
    Outcome of one run.

    Attributes:
        config: Echo of the resolved configuration
        iterations: GMRES iterations
        converged: Stopping criterion met
        cp_est, Cp_est: Hessenberg estimates of the convergence parameters
        l2_history: Relative l2 norms of b_FV - B_FV u_k, length iterations + 1
        preconditioned_history: Relative l2 norms of g - T u_k
        energy_history: Relative A_FE norms of g - T u_k (the minimized norm)
        timings: Seconds per phase (mesh, assembly, setup, solve)
        n_dofs, n_free, n_interfaces: Problem sizes
        direct_error: Energy-relative distance to the direct FV solve
        fe_fv_distance: Energy-relative distance between FE and FV solutions
    """
    config: Dict
    iterations: int
    converged: bool
    cp_est: Optional[float]
    Cp_est: Optional[float]
    l2_history: List[float]
    preconditioned_history: List[float]
    energy_history: List[float]
    timings: Dict[str, float] = field(default_factory=dict)
    n_dofs: int = 0
    n_free: int = 0
    n_interfaces: int = 0
    direct_error: Optional[float] = None
    fe_fv_distance: Optional[float] = None

    @property
    def total_seconds(self) -> float:
        return float(sum(self.timings.values()))

    def to_dict(self) -> Dict:
        return asdict(self)

    def to_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding='utf-8')
        return path


def _stage(name: str, timings: Dict[str, float], fn, *args, **kwargs):
    start = time.perf_counter()
    try:
        result = fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc) from exc
    timings[name] = time.perf_counter() - start
    logger.info("stage %s done in %.3fs", name, timings[name])
    return result


def _build_discretization(config: ExperimentConfig):
    mesh = build_structured_mesh(config.n, config.diagonal)
    partition = build_partition(mesh, config.m)
    dofmap = enumerate_cr_dofs(mesh)
    dual = build_control_volumes(mesh)
    coeff = make_coefficient(partition.n_subdomains, config.freq, config.alpha1, config.red_mask)
    return mesh, partition, dofmap, dual, coeff


def run(config: ExperimentConfig, compare_direct: bool = False) -> Report:
    """
    Run the full pipeline for one configuration.

    Args:
        config: Validated configuration
        compare_direct: Also solve B_FV u = b_FV and A_FE u = b_FE directly

    Returns:
        Report

    Raises:
        StageError: A stage failed; ``stage`` is 'mesh', 'assemble',
            'setup', 'solve' (or 'direct' with compare_direct)
    """
    config.validate()
    timings: Dict[str, float] = {}
    mesh, partition, dofmap, dual, coeff = _stage("mesh", timings, _build_discretization, config)
    system = _stage("assemble", timings, assemble_system, mesh, dofmap, dual, partition,
                    coeff, config.rhs)
    precond = _stage("setup", timings, setup, config.variant, system.A_FE, system.B_FV, partition)
    u, trace = _stage("solve", timings, solve, precond, system.A_FE, system.b_FV,
                      config.tol, config.maxit, monitor=config.monitor)

    report = Report(
        config=config.to_dict(),
        iterations=trace.iterations,
        converged=trace.converged,
        cp_est=trace.cp_est,
        Cp_est=trace.Cp_est,
        l2_history=trace.relative_system_residuals.tolist(),
        preconditioned_history=trace.relative_l2_residuals.tolist(),
        energy_history=trace.relative_residuals.tolist(),
        timings=timings,
        n_dofs=dofmap.n_dofs,
        n_free=dofmap.n_free,
        n_interfaces=len(partition.interfaces),
    )
    if compare_direct:
        u_fv = _stage("direct", timings, solve_fv_direct, system)
        u_fe = solve_fe_direct(system)
        norm_fv = energy_norm(system.A_FE, u_fv)
        report.direct_error = energy_norm(system.A_FE, u - u_fv) / norm_fv
        report.fe_fv_distance = energy_norm(system.A_FE, u_fe - u_fv) / norm_fv
    logger.info("run n=%d m=%d alpha1=%g %s: %d iterations", config.n, config.m,
                config.alpha1, config.variant, report.iterations)
    return report


# =============================================================================
# Sweeps
# =============================================================================

def is_valid_cell(config: ExperimentConfig) -> bool:
    """Grid cells need m | n and m < n."""
    return config.m < config.n and config.n % config.m == 0


def alpha_sweep(base: ExperimentConfig, exponents: Iterable[int] = range(7)) -> List[ExperimentConfig]:
    """alpha1 = 10^k for every exponent k."""
    return [base.with_overrides(alpha1=10.0 ** k) for k in exponents]


def grid_sweep(base: ExperimentConfig, ns: Sequence[int], ms: Sequence[int]) -> List[ExperimentConfig]:
    """Every (n, m) combination row by row; invalid cells are kept and skipped at run time."""
    return [_grid_config(base, n, m) for n in ns for m in ms]


def _grid_config(base: ExperimentConfig, n: int, m: int) -> ExperimentConfig:
    # red masks are tied to one subdomain grid
    mask = base.red_mask if m == base.m else []
    return base.with_overrides(n=n, m=m, red_mask=mask)


def _run_cell(config: ExperimentConfig) -> Optional[Report]:
    return run(config) if is_valid_cell(config) else None


def run_sweep(configs: Sequence[ExperimentConfig], workers: int = 1) -> List[Optional[Report]]:
    """
    Run every cell; invalid cells yield None.

    With workers > 1 the cells run in a process pool; results keep sweep order.
    """
    if workers > 1 and len(configs) > 1:
        with multiprocessing.Pool(workers) as pool:
            return pool.map(_run_cell, configs, chunksize=1)
    return [_run_cell(c) for c in configs]


def table_csv(configs: Sequence[ExperimentConfig], reports: Sequence[Optional[Report]]) -> str:
    """CSV rows in sweep order; skipped cells keep empty result fields."""
    fmt = lambda v: "" if v is None else f"{v:.6e}"             # noqa: E731
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for config, report in zip(configs, reports):
        row = [str(config.n), str(config.m), str(config.freq), repr(float(config.alpha1)), config.variant]
        if report is None:
            row += ["", "", "", ""]
        else:
            row += [str(report.iterations), fmt(report.cp_est), fmt(report.Cp_est),
                    f"{report.total_seconds:.3f}"]
        writer.writerow(row)
    return buf.getvalue()


def run_table(configs: Sequence[ExperimentConfig], path: Optional[Union[str, Path]] = None,
              workers: int = 1) -> str:
    """
    Run a sweep and render it as CSV.

    Args:
        configs: Cells in output order
        path: Optional file to write the CSV to
        workers: Process pool size; rows keep sweep order

    Returns:
        CSV text, header only for an empty sweep
    """
    text = table_csv(configs, run_sweep(configs, workers))
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')
    return text


# =============================================================================
# Plot data
# =============================================================================

PLOT_KINDS = ("l2", "preconditioned", "energy")


def emit_residual_plot_data(report: Report, path: Union[str, Path], kind: str = "l2") -> Path:
    """
    Write 'iteration relative_residual' lines, starting with '0 1.0'.

    Args:
        kind: 'l2' (unpreconditioned FV residual), 'preconditioned'
            (l2 norm of g - T u) or 'energy' (the norm GMRES minimizes,
            nonincreasing)
    """
    if kind not in PLOT_KINDS:
        raise InvalidParameterError(f"kind must be one of {PLOT_KINDS}, got {kind!r}")
    history = {'l2': report.l2_history, 'preconditioned': report.preconditioned_history,
               'energy': report.energy_history}[kind]
    path = Path(path)
    lines = [f"{k} {float(v)!r}" for k, v in enumerate(history)]
    path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    return path


def emit_sweep_plot_data(reports: Sequence[Report], directory: Union[str, Path],
                         kind: str = "l2") -> List[Path]:
    """One plot-data file per run of an alpha1 sweep."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for report in reports:
        cfg = report.config
        name = f"residual_n{cfg['n']}_m{cfg['m']}_alpha1_{cfg['alpha1']:.0e}_{cfg['variant']}.txt"
        paths.append(emit_residual_plot_data(report, directory / name, kind))
    return paths


def history_is_monotone(history: Sequence[float]) -> bool:
    h = np.asarray(history, dtype=float)
    return bool(np.all(np.diff(h) <= 1e-12 * max(h.max(initial=0.0), 1.0)))
