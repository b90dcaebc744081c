"""
CRFVE Edge Schwarz - Subspace Projections
=========================================

For A constant on every element B_FV = A_FE, and in the sym variant every
component T_i is the A_FE-orthogonal projection onto its subspace:

    T_i T_i = T_i,    a(T_i u, v) = a(u, T_i v)

so T is symmetric positive definite in the energy inner product.

Also checked here:
    - discrete harmonic extensions have minimal energy among all functions
      with the same subdomain boundary values
    - g computed from b_FV equals T applied to the direct solution
"""

import time

import numpy as np

from ..core import (build_problem, dense_operator_matrix, energy_norm, harmonic_extension,
                    make_piecewise_constant, setup, solve_fv_direct)


def _piecewise_constant(m: int):
    return make_piecewise_constant(1.0 + np.arange(m * m) % 3 * 4.5)


def verify_projection_properties(n: int = 16, m: int = 4, samples: int = 10,
                                 seed: int = 0, tol: float = 1e-10) -> dict:
    """
    Idempotence and energy self-adjointness of every T_i on random samples.
    """
    start = time.time()
    problem = build_problem(n, m, _piecewise_constant(m))
    A = problem.system.A_FE
    precond = setup("sym", A, problem.system.B_FV, problem.partition)
    rng = np.random.default_rng(seed)

    worst_idem = 0.0
    worst_adj = 0.0
    for _ in range(samples):
        u = rng.standard_normal(precond.n_free)
        v = rng.standard_normal(precond.n_free)
        nu, nv = energy_norm(A, u), energy_norm(A, v)
        for i in range(len(precond.subspaces)):
            tu = precond.apply_subspace(i, u)
            ttu = precond.apply_subspace(i, tu)
            tv = precond.apply_subspace(i, v)
            worst_idem = max(worst_idem, energy_norm(A, ttu - tu) / nu)
            worst_adj = max(worst_adj, abs(float(v @ (A @ tu)) - float(tv @ (A @ u))) / (nu * nv))

    return {
        'theorem': 'Subspace projections',
        'statement': 'T_i^2 = T_i and a(T_i u, v) = a(u, T_i v)',
        'range_checked': f'n={n}, m={m}, {len(precond.subspaces)} subspaces, {samples} samples',
        'max_idempotence_defect': worst_idem,
        'max_adjointness_defect': worst_adj,
        'violations': int(worst_idem > tol) + int(worst_adj > tol),
        'verified': worst_idem <= tol and worst_adj <= tol,
        'time_seconds': time.time() - start,
    }


def verify_operator_spd(n: int = 8, m: int = 2) -> dict:
    """Dense check that T is energy-symmetric positive definite."""
    start = time.time()
    problem = build_problem(n, m, _piecewise_constant(m))
    A = problem.system.A_FE.toarray()
    precond = setup("sym", problem.system.A_FE, problem.system.B_FV, problem.partition)
    T = dense_operator_matrix(precond.apply_T, precond.n_free)
    AT = A @ T
    asym = float(np.abs(AT - AT.T).max() / np.abs(AT).max())
    lam_min = float(np.linalg.eigvalsh(0.5 * (AT + AT.T)).min())
    return {
        'theorem': 'Energy SPD operator',
        'statement': 'A T symmetric and positive definite',
        'range_checked': f'n={n}, m={m}',
        'asymmetry': asym,
        'min_eigenvalue': lam_min,
        'violations': int(asym > 1e-10) + int(lam_min <= 0),
        'verified': asym <= 1e-10 and lam_min > 0,
        'time_seconds': time.time() - start,
    }


def verify_minimal_energy(n: int = 8, m: int = 2, subdomain: int = 0,
                          competitors: int = 20, seed: int = 0) -> dict:
    """
    a(Hu, Hu) <= a(v, v) for random v sharing the boundary values of Hu.
    """
    start = time.time()
    problem = build_problem(n, m, freq=10)
    A = problem.system.A_FE
    part = problem.partition
    interior = part.free(part.interior_dofs[subdomain])
    boundary = part.free(part.boundary_dofs[subdomain])
    rng = np.random.default_rng(seed)

    values = rng.standard_normal(boundary.size)
    ext = harmonic_extension(A, interior, boundary, values)
    e_min = energy_norm(A, ext) ** 2
    violations = 0
    for _ in range(competitors):
        v = ext.copy()
        v[interior] += rng.standard_normal(interior.size) * 10 ** rng.uniform(-3, 0)
        if energy_norm(A, v) ** 2 < e_min * (1 - 1e-12):
            violations += 1

    return {
        'theorem': 'Minimal energy extension',
        'statement': 'a(Hu, Hu) <= a(v, v) whenever v = Hu on the subdomain boundary',
        'range_checked': f'n={n}, m={m}, subdomain {subdomain}, {competitors} competitors',
        'harmonic_energy': e_min,
        'violations': violations,
        'verified': violations == 0,
        'time_seconds': time.time() - start,
    }


def verify_rhs_consistency(n: int = 8, m: int = 2, freq: int = 10, variant: str = "sym") -> dict:
    """
    g = T u* for the direct FV solution u*, and g equals the dense subspace
    sum of Phi_i (Phi_i^T M Phi_i)^{-1} Phi_i^T b_FV.
    """
    start = time.time()
    problem = build_problem(n, m, freq=freq)
    sys_ = problem.system
    precond = setup(variant, sys_.A_FE, sys_.B_FV, problem.partition)
    g = precond.compute_g(sys_.b_FV)
    u_star = solve_fv_direct(sys_)
    Tu = precond.apply_T(u_star)
    consistency = float(np.linalg.norm(g - Tu) / np.linalg.norm(g))

    M = precond.M.toarray()
    oracle = np.zeros(precond.n_free)
    for sub in precond.subspaces:
        Phi = sub.dense_basis(precond.n_free)
        oracle += Phi @ np.linalg.solve(Phi.T @ M @ Phi, Phi.T @ sys_.b_FV)
    oracle_error = float(np.linalg.norm(g - oracle) / np.linalg.norm(oracle))

    return {
        'theorem': 'Right-hand side consistency',
        'statement': 'g = T u* and g = sum_i Phi_i (Phi_i^T M Phi_i)^-1 Phi_i^T b',
        'range_checked': f'n={n}, m={m}, freq={freq}, variant={variant}',
        'consistency_error': consistency,
        'oracle_error': oracle_error,
        'violations': int(consistency > 1e-8) + int(oracle_error > 1e-8),
        'verified': consistency <= 1e-8 and oracle_error <= 1e-8,
        'time_seconds': time.time() - start,
    }


def print_results(result: dict):
    """Pretty print verification results."""
    print(f"\n{'='*60}")
    print(f"  {result['theorem']}")
    print(f"{'='*60}")
    print(f"  Statement: {result['statement']}")
    print(f"  Range: {result['range_checked']}")
    for key in ('max_idempotence_defect', 'max_adjointness_defect', 'asymmetry',
                'min_eigenvalue', 'harmonic_energy', 'consistency_error', 'oracle_error'):
        if key in result:
            print(f"  {key}: {result[key]:.3e}")
    print(f"  Violations: {result['violations']}")
    print(f"  VERIFIED: {'✓ YES' if result['verified'] else '✗ NO'}")
    print(f"  Time: {result['time_seconds']:.2f}s")
    print()


if __name__ == "__main__":
    print("="*60)
    print(" CRFVE Subspace Projection Checks")
    print("="*60)

    print_results(verify_projection_properties())
    print_results(verify_operator_spd())
    print_results(verify_minimal_energy())
    print_results(verify_rhs_consistency())

    import argparse
    parser = argparse.ArgumentParser()
    parser.add_argument('--full', action='store_true',
                        help='Also check the nsym variant and every subdomain')
    args, _ = parser.parse_known_args()

    if args.full:
        print_results(verify_rhs_consistency(variant="nsym"))
        for k in range(4):
            print_results(verify_minimal_energy(subdomain=k))
