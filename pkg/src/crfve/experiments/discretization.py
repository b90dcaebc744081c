"""
CRFVE Edge Schwarz - Discretization Checks
==========================================

FV/FE identity:
    For A constant on every element, B_FV == A_FE entrywise.

Form discrepancy:
    sup |a^FE(u, v) - a^FV(u, v)| / (||u||_a ||v||_a) = O(h) for smooth A,
    so halving h roughly halves the discrepancy.

Coercivity:
    The symmetric part of B_FV is positive definite relative to A_FE on
    fine enough meshes.
"""

import time
from typing import Sequence

import numpy as np

from ..core import (assemble_fe, assemble_fv, build_control_volumes, build_partition,
                    build_problem, build_structured_mesh, enumerate_cr_dofs, form_discrepancy,
                    fv_coercivity_constant, make_coefficient, make_piecewise_constant)


def verify_fv_fe_identity_single(n: int, m: int = 2) -> dict:
    """
    Compare B_FV with A_FE for a subdomain-wise constant coefficient, and
    check that both unreduced matrices annihilate constants for a smooth one.
    """
    mesh = build_structured_mesh(n)
    partition = build_partition(mesh, m)
    dofmap = enumerate_cr_dofs(mesh)
    dual = build_control_volumes(mesh)

    mult = 1.0 + np.arange(partition.n_subdomains) % 3 * 4.5
    coeff = make_piecewise_constant(mult)
    A = assemble_fe(mesh, dofmap, partition, coeff)
    B = assemble_fv(mesh, dual, dofmap, partition, coeff)
    scale = float(abs(A).max())
    diff = float(abs(A - B).max()) if A.nnz else 0.0

    smooth = make_coefficient(partition.n_subdomains, freq=10)
    A_full = assemble_fe(mesh, dofmap, partition, smooth, eliminate=False)
    B_full = assemble_fv(mesh, dual, dofmap, partition, smooth, eliminate=False)
    ones = np.ones(mesh.n_edges)
    kernel = max(float(np.abs(A_full @ ones).max()), float(np.abs(B_full @ ones).max()))

    return {
        'n': n,
        'm': m,
        'max_difference': diff,
        'relative_difference': diff / scale,
        'constant_residual': kernel,
        'passed': diff <= 1e-12 * scale and kernel <= 1e-10 * float(abs(A_full).max()),
    }


def verify_fv_fe_identity(ns: Sequence[int] = (2, 4, 8)) -> dict:
    start = time.time()
    cases = [verify_fv_fe_identity_single(n) for n in ns]
    return {
        'theorem': 'FV/FE identity',
        'statement': 'B_FV = A_FE for elementwise-constant A',
        'range_checked': f'n ∈ {list(ns)}',
        'cases': cases,
        'violations': sum(not c['passed'] for c in cases),
        'verified': all(c['passed'] for c in cases),
        'time_seconds': time.time() - start,
    }


def verify_form_discrepancy_scaling(ns: Sequence[int] = (16, 32, 64), freq: int = 10,
                                    trials: int = 64, seed: int = 0,
                                    ratio_range=(1.6, 2.5)) -> dict:
    """
    Discrepancy ratio between successive refinements for a smooth coefficient.

    Args:
        ns: Increasing mesh sizes, each the double of the previous
        trials: Random vector pairs per mesh
        ratio_range: Accepted range of value(h) / value(h/2)
    """
    start = time.time()
    values = []
    for n in ns:
        problem = build_problem(n, 2, freq=freq)
        values.append(form_discrepancy(problem.system.A_FE, problem.system.B_FV, trials, seed))
    ratios = [values[i] / values[i + 1] for i in range(len(values) - 1)]
    lo, hi = ratio_range
    return {
        'theorem': 'Form discrepancy O(h)',
        'statement': '|a^FE(u,v) - a^FV(u,v)| <= C h ||u||_a ||v||_a',
        'range_checked': f'n ∈ {list(ns)}, freq={freq}, {trials} samples',
        'values': values,
        'ratios': ratios,
        'violations': sum(not lo <= r <= hi for r in ratios),
        'verified': all(lo <= r <= hi for r in ratios),
        'time_seconds': time.time() - start,
    }


def verify_fv_coercivity(n: int = 8, m: int = 2, freq: int = 10) -> dict:
    """Smallest eigenvalue of sym(B_FV) relative to A_FE (dense)."""
    start = time.time()
    problem = build_problem(n, m, freq=freq)
    lam = fv_coercivity_constant(problem.system.A_FE, problem.system.B_FV)
    return {
        'theorem': 'FV coercivity',
        'statement': 'min u^T B_FV u / u^T A_FE u > 0',
        'range_checked': f'n={n}, m={m}, freq={freq}',
        'min_eigenvalue': lam,
        'violations': int(lam <= 0),
        'verified': lam > 0,
        'time_seconds': time.time() - start,
    }


def print_results(result: dict):
    """Pretty print verification results."""
    print(f"\n{'='*60}")
    print(f"  {result['theorem']}")
    print(f"{'='*60}")
    print(f"  Statement: {result['statement']}")
    print(f"  Range: {result['range_checked']}")
    for case in result.get('cases', []):
        print(f"  n={case['n']:3d}: max|A_FE - B_FV| = {case['max_difference']:.2e}, "
              f"|A 1|,|B 1| <= {case['constant_residual']:.2e}")
    if 'ratios' in result:
        print(f"  Discrepancies: {', '.join(f'{v:.3e}' for v in result['values'])}")
        print(f"  Ratios:        {', '.join(f'{r:.2f}' for r in result['ratios'])}")
    if 'min_eigenvalue' in result:
        print(f"  Min eigenvalue: {result['min_eigenvalue']:.4f}")
    print(f"  Violations: {result['violations']}")
    print(f"  VERIFIED: {'✓ YES' if result['verified'] else '✗ NO'}")
    print(f"  Time: {result['time_seconds']:.2f}s")
    print()


if __name__ == "__main__":
    print("="*60)
    print(" CRFVE Discretization Checks")
    print("="*60)

    print_results(verify_fv_fe_identity())
    print_results(verify_fv_coercivity())
    print_results(verify_form_discrepancy_scaling(ns=(8, 16, 32), trials=16))

    import argparse
    parser = argparse.ArgumentParser()
    parser.add_argument('--full', action='store_true',
                        help='Run the discrepancy scaling up to n = 64 with 64 samples')
    args, _ = parser.parse_known_args()

    if args.full:
        print_results(verify_form_discrepancy_scaling())
