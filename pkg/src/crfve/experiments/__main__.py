"""Run every verification: python -m crfve.experiments [--full]."""

import argparse

from . import discretization, edge_energy, gmres_bound, iteration_tables, projections


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m crfve.experiments")
    parser.add_argument('--full', action='store_true',
                        help='Include the n >= 64 sweeps')
    args = parser.parse_args(argv)

    results = [
        (discretization, discretization.verify_fv_fe_identity()),
        (discretization, discretization.verify_fv_coercivity()),
        (discretization, discretization.verify_form_discrepancy_scaling(
            ns=(16, 32, 64) if args.full else (8, 16, 32), trials=64 if args.full else 16)),
        (gmres_bound, gmres_bound.verify_residual_bound()),
        (projections, projections.verify_projection_properties()),
        (projections, projections.verify_operator_spd()),
        (projections, projections.verify_minimal_energy()),
        (projections, projections.verify_rhs_consistency()),
        (edge_energy, edge_energy.verify_edge_energy_growth()),
        (iteration_tables, iteration_tables.verify_jump_robustness()),
    ]
    if args.full:
        results += [
            (iteration_tables, iteration_tables.verify_constant_ratio()),
            (iteration_tables, iteration_tables.verify_polylog_growth()),
            (iteration_tables, iteration_tables.verify_oscillatory()),
        ]

    for module, result in results:
        module.print_results(result)
    failed = [r['theorem'] for _, r in results if not r['verified']]
    print("="*60)
    print(f"  {len(results) - len(failed)}/{len(results)} verified")
    for name in failed:
        print(f"  ✗ {name}")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
