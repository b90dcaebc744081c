"""
CRFVE Edge Schwarz - Verification Suite
=======================================

Named property checks over desk-scale instances. Each check returns a
result dict with a boolean 'verified'; the suite collects measured values
and the expectation of every check into one machine-readable report.
"""

import json
import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .. import experiments
from ..core import InvalidParameterError, build_problem
from .config import ExperimentConfig
from .runner import run

logger = logging.getLogger(__name__)


def check_fe_symmetry(matrix, tol: float = 0.0) -> dict:
    """Index-level symmetry of an FE matrix: max |A - A^T| <= tol * max |A|."""
    A = sp.csr_matrix(matrix)
    diff = float(abs(A - A.T).max()) if A.nnz else 0.0
    scale = float(abs(A).max()) if A.nnz else 1.0
    ok = diff <= tol * scale
    return {
        'theorem': 'FE symmetry',
        'statement': 'A_FE = A_FE^T',
        'max_asymmetry': diff,
        'violations': int(not ok),
        'verified': ok,
    }


def check_direct_agreement(n: int = 8, m: int = 4, freq: int = 10,
                           variant: str = "sym") -> dict:
    """GMRES solution against the direct FV solve, energy-relative."""
    config = ExperimentConfig(n=n, m=m, freq=freq, variant=variant)
    report = run(config, compare_direct=True)
    ok = report.converged and report.direct_error <= 1e-5
    return {
        'theorem': 'Direct-solve agreement',
        'statement': '||u_gmres - u_direct||_a <= 1e-5 ||u_direct||_a',
        'direct_error': report.direct_error,
        'fe_fv_distance': report.fe_fv_distance,
        'iterations': report.iterations,
        'violations': int(not ok),
        'verified': ok,
    }


def _fe_symmetry_default() -> dict:
    return check_fe_symmetry(build_problem(8, 2, freq=10).system.A_FE)


CHECKS: Dict[str, Dict[str, Any]] = {
    'fe_symmetry': {
        'run': _fe_symmetry_default,
        'expected': 'max |A_FE - A_FE^T| = 0',
    },
    'fv_fe_identity': {
        'run': experiments.verify_fv_fe_identity,
        'expected': 'max |A_FE - B_FV| <= 1e-12 max |A_FE| for n in {2, 4, 8}',
    },
    'fv_coercivity': {
        'run': experiments.verify_fv_coercivity,
        'expected': 'min eig of sym(B_FV) relative to A_FE > 0',
    },
    'form_discrepancy': {
        'run': lambda: experiments.verify_form_discrepancy_scaling(ns=(16, 32, 64)),
        'expected': 'discrepancy ratio per halving of h in [1.6, 2.5]',
        'slow': True,
    },
    'projections': {
        'run': experiments.verify_projection_properties,
        'expected': 'idempotence and energy self-adjointness defects <= 1e-10',
    },
    'operator_spd': {
        'run': experiments.verify_operator_spd,
        'expected': 'A T symmetric positive definite',
    },
    'minimal_energy': {
        'run': experiments.verify_minimal_energy,
        'expected': 'harmonic extension has minimal energy',
    },
    'rhs_consistency': {
        'run': experiments.verify_rhs_consistency,
        'expected': 'g = T u_direct within 1e-8',
    },
    'direct_agreement': {
        'run': check_direct_agreement,
        'expected': 'GMRES vs direct solve within 1e-5 in energy norm',
    },
    'residual_bound': {
        'run': experiments.verify_residual_bound,
        'expected': '||r_m||_a <= (1 - c_p^2/C_p^2)^(m/2) ||r_0||_a, c_p > 0',
    },
    'edge_energy': {
        'run': experiments.verify_edge_energy_growth,
        'expected': 'edge energy fits c0 + c1 log(H/h) within 10%',
    },
    'jump_robustness': {
        'run': experiments.verify_jump_robustness,
        'expected': 'iters(1e6) <= 1.6 iters(1), all in [12, 40]',
    },
}

DEFAULT_CHECKS = [name for name, c in CHECKS.items() if not c.get('slow')]


def _measured(result: dict) -> Dict[str, Any]:
    out = {}
    for key, value in result.items():
        if key in ('theorem', 'statement', 'verified', 'time_seconds', 'range_checked'):
            continue
        if isinstance(value, (bool, int, float, np.floating, np.integer)):
            out[key] = value.item() if hasattr(value, 'item') else value
    return out


def run_verify(checks: Optional[Sequence[str]] = None, full: bool = False,
               runners: Optional[Dict[str, Callable[[], dict]]] = None) -> dict:
    """
    Run a subset of the verification suite.

    Args:
        checks: Check names; None selects the default suite (all checks with
            ``full``); an empty list is a vacuous pass
        full: Include the slow checks in the default selection
        runners: Optional name -> callable overrides

    Returns:
        {'passed': bool, 'checks': [...], 'failed': [...], 'warnings': [...]}
    """
    if checks is None:
        checks = list(CHECKS) if full else list(DEFAULT_CHECKS)
    unknown = [c for c in checks if c not in CHECKS and not (runners and c in runners)]
    if unknown:
        raise InvalidParameterError(f"unknown checks: {unknown}; choose from {sorted(CHECKS)}")

    warnings: List[str] = []
    if not checks:
        msg = "empty check subset: nothing verified"
        logger.warning(msg)
        warnings.append(msg)

    entries = []
    for name in checks:
        fn = runners[name] if runners and name in runners else CHECKS[name]['run']
        start = time.time()
        result = fn()
        entries.append({
            'name': name,
            'verified': bool(result['verified']),
            'expected': CHECKS[name]['expected'] if name in CHECKS else result.get('statement', ''),
            'measured': _measured(result),
            'seconds': time.time() - start,
        })
        log = logger.info if result['verified'] else logger.warning
        log("check %s: %s", name, "pass" if result['verified'] else "FAIL")

    failed = [e['name'] for e in entries if not e['verified']]
    return {
        'passed': not failed,
        'checks': entries,
        'failed': failed,
        'warnings': warnings,
    }


def write_report(report: dict, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report, indent=2, default=float), encoding='utf-8')
    return path


def format_report(report: dict) -> str:
    lines = ["=" * 60, "  Verification suite", "=" * 60]
    for e in report['checks']:
        mark = '✓' if e['verified'] else '✗'
        lines.append(f"  {mark} {e['name']:<18s} {e['seconds']:7.2f}s")
        if not e['verified']:
            lines.append(f"      expected: {e['expected']}")
            lines.append(f"      measured: {e['measured']}")
    for w in report['warnings']:
        lines.append(f"  warning: {w}")
    lines.append(f"  VERIFIED: {'✓ YES' if report['passed'] else '✗ NO'}")
    return "\n".join(lines)
