"""
CRFVE Edge Schwarz - Command Line
=================================

    crfve-bench run    [--preset P] [--n N] [--m M] ... [--out DIR]
    crfve-bench table  --sweep {alpha,grid} [--ns ...] [--ms ...] [--out FILE]
    crfve-bench verify [--checks a,b,c] [--full] [--out FILE]

Exit code 0 iff every requested run converged (and verification passed);
1 on failure or non-convergence; 2 on invalid arguments.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..core import CRFVEError, MONITORS, PRESETS, StageError, VARIANTS
from ..experiments import TABLE_FREQ10, TABLE_FREQ100, TABLE_JUMPS
from .config import ExperimentConfig, load_config
from .runner import (alpha_sweep, emit_residual_plot_data, emit_sweep_plot_data, grid_sweep,
                     run, run_sweep, table_csv)
from .verify import format_report, run_verify, write_report

logger = logging.getLogger(__name__)


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument('--config', type=Path, help='JSON config file')
    p.add_argument('--preset', choices=sorted(PRESETS), help='Red-region preset')
    p.add_argument('--n', type=int, help='Fine blocks per side (h = 1/n)')
    p.add_argument('--m', type=int, help='Subdomains per side (H = 1/m)')
    p.add_argument('--freq', type=int, help='Coefficient frequency (0: A = 1)')
    p.add_argument('--alpha1', type=float, help='Red subdomain multiplier')
    p.add_argument('--red-mask', type=_int_list, dest='red_mask', help='Comma-separated subdomains')
    p.add_argument('--variant', choices=VARIANTS)
    p.add_argument('--tol', type=float)
    p.add_argument('--monitor', choices=MONITORS, help='Stopping residual (default: system)')
    p.add_argument('--maxit', type=int)
    p.add_argument('--rhs', type=float, help='Constant source value')
    p.add_argument('--seed', type=int)
    p.add_argument('--diagonal', choices=('ne', 'nw'))
    p.add_argument('--workers', type=int, help='Sweep process pool size')


def _add_output_args(p: argparse.ArgumentParser) -> None:
    # unset unless given, at either level; main() fills in False
    p.add_argument('-v', '--verbose', action='store_true', default=argparse.SUPPRESS,
                   help='Debug logging')
    p.add_argument('--quiet', action='store_true', default=argparse.SUPPRESS,
                   help='Suppress table and summary echo')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_output_args(common)
    parser = argparse.ArgumentParser(
        prog='crfve-bench',
        description='Edge-based additive Schwarz GMRES for CR finite volume element systems')
    _add_output_args(parser)
    sub = parser.add_subparsers(dest='command', required=True)

    p_run = sub.add_parser('run', parents=[common], help='Solve one configuration')
    _add_config_args(p_run)
    p_run.add_argument('--direct', action='store_true', help='Compare with direct solves')
    p_run.add_argument('--out', type=Path, help='Directory for report.json and residual data')

    p_table = sub.add_parser('table', parents=[common], help='Run an alpha1 or (h, H) sweep to CSV')
    _add_config_args(p_table)
    p_table.add_argument('--sweep', choices=('alpha', 'grid'), default='alpha')
    p_table.add_argument('--exponents', type=_int_list, default=list(range(7)),
                         help='alpha1 = 10^k exponents')
    p_table.add_argument('--ns', type=_int_list, default=[8, 16, 32, 64])
    p_table.add_argument('--ms', type=_int_list, default=[4, 8, 16, 32])
    p_table.add_argument('--plot-dir', type=Path, help='Residual data per alpha1 (alpha sweep)')
    p_table.add_argument('--reference', action='store_true', help='Print published values')
    p_table.add_argument('--out', type=Path, help='CSV output file (default stdout)')

    p_verify = sub.add_parser('verify', parents=[common], help='Run the verification suite')
    p_verify.add_argument('--checks', type=lambda s: [c for c in s.split(',') if c],
                          help='Comma-separated check names (empty: vacuous pass)')
    p_verify.add_argument('--full', action='store_true', help='Include slow checks')
    p_verify.add_argument('--out', type=Path, help='JSON report file')
    return parser


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {k: getattr(args, k, None) for k in (
        'n', 'm', 'freq', 'alpha1', 'red_mask', 'variant', 'tol', 'monitor', 'maxit', 'rhs', 'seed',
        'diagonal', 'workers')}
    return load_config(args.config, args.preset, **overrides)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _resolve(args)
    report = run(config, compare_direct=args.direct)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        report.to_json(args.out / 'report.json')
        emit_residual_plot_data(report, args.out / 'residual_energy.txt', 'energy')
        emit_residual_plot_data(report, args.out / 'residual_l2.txt', 'l2')
        emit_residual_plot_data(report, args.out / 'residual_preconditioned.txt', 'preconditioned')
    if not args.quiet:
        cp = f"{report.cp_est:.3e}" if report.cp_est is not None else '-'
        print(f"n={config.n} m={config.m} freq={config.freq} alpha1={config.alpha1:g} "
              f"{config.variant}: {report.iterations} iterations ({cp}), "
              f"converged={report.converged}, {report.n_free} free dofs")
        print("  " + ", ".join(f"{k} {v:.3f}s" for k, v in report.timings.items()))
        if report.direct_error is not None:
            print(f"  direct error {report.direct_error:.2e}, FE/FV distance {report.fe_fv_distance:.2e}")
    return 0 if report.converged else 1


def _cmd_table(args: argparse.Namespace) -> int:
    base = _resolve(args)
    if args.sweep == 'alpha':
        configs = alpha_sweep(base, args.exponents)
    else:
        configs = grid_sweep(base, args.ns, args.ms)
    reports = run_sweep(configs, workers=base.workers)
    text = table_csv(configs, reports)
    if args.out is not None:
        args.out.write_text(text, encoding='utf-8')
    elif not args.quiet:
        sys.stdout.write(text)

    done = [r for r in reports if r is not None]
    if args.plot_dir and args.sweep == 'alpha':
        emit_sweep_plot_data(done, args.plot_dir)

    if args.reference and not args.quiet:
        if args.sweep == 'alpha' and base.preset in TABLE_JUMPS:
            ref = TABLE_JUMPS[base.preset]
            print(f"published ({base.preset}): " +
                  ", ".join(f"1e{k}: {ref[k][0]}" for k in args.exponents if k in ref))
        elif args.sweep == 'grid':
            table = TABLE_FREQ100 if base.freq == 100 else TABLE_FREQ10
            print("published (n, m): " + ", ".join(
                f"({c.n},{c.m}): {table[(c.n, c.m)][0]}" for c in configs if (c.n, c.m) in table))

    return 0 if all(r.converged for r in done) else 1


def _cmd_verify(args: argparse.Namespace) -> int:
    report = run_verify(args.checks, full=args.full)
    if args.out:
        write_report(report, args.out)
    if not args.quiet:
        print(format_report(report))
    return 0 if report['passed'] else 1


COMMANDS = {'run': _cmd_run, 'table': _cmd_table, 'verify': _cmd_verify}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.verbose = getattr(args, 'verbose', False)
    args.quiet = getattr(args, 'quiet', False)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CRFVEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
