"""
Bench Tests
===========
Tests for configuration resolution, the experiment runner, the
verification suite and the crfve-bench command line.
"""

import json

import pytest
import numpy as np
from crfve.core import InvalidParameterError, StageError, build_problem
from crfve.experiments import GRID_MS, GRID_NS
from crfve.bench import (
    CHECKS, CSV_HEADER, DEFAULT_CHECKS, ExperimentConfig, load_config,
    run, run_sweep, run_table, table_csv, alpha_sweep, grid_sweep, is_valid_cell,
    emit_residual_plot_data, emit_sweep_plot_data, history_is_monotone,
    check_fe_symmetry, run_verify, format_report, write_report,
)
from crfve.bench import runner
from crfve.bench.cli import build_parser, main


@pytest.fixture(scope="module")
def report():
    """One small converged run"""
    return run(ExperimentConfig(n=8, m=2, freq=10))


class TestConfig:
    """Tests for ExperimentConfig and load_config"""

    def test_defaults_valid(self):
        """Defaults pass validation"""
        config = ExperimentConfig().validate()
        assert (config.n, config.m, config.variant, config.tol) == (32, 4, "sym", 1e-6)
        assert config.n_subdomains == 16

    @pytest.mark.parametrize("kwargs", [
        {'n': 30},
        {'m': 0},
        {'tol': 0.0},
        {'tol': 1.0},
        {'alpha1': 0.0},
        {'freq': -1},
        {'maxit': 0},
        {'variant': 'both'},
        {'diagonal': 'sw'},
        {'workers': 0},
        {'monitor': 'energy'},
        {'red_mask': [16]},
    ])
    def test_invalid(self, kwargs):
        """Out-of-range fields raise InvalidParameterError"""
        with pytest.raises(InvalidParameterError):
            ExperimentConfig(**kwargs).validate()

    def test_with_overrides(self):
        """None values and unknown keys leave the config unchanged"""
        config = ExperimentConfig().with_overrides(n=16, m=None, bogus=3, red_mask=(1, 2))
        assert config.n == 16
        assert config.m == 4
        assert config.red_mask == [1, 2]

    def test_from_dict_unknown(self):
        """Unknown keys in a config file are rejected"""
        with pytest.raises(InvalidParameterError):
            ExperimentConfig.from_dict({'n': 8, 'mesh': 'fine'})

    def test_precedence(self, tmp_path):
        """defaults < JSON file < preset < explicit overrides"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({'n': 16, 'm': 2, 'tol': 1e-8}))
        assert load_config(path).n == 16
        config = load_config(path, 'problem1', n=64)
        assert config.n == 64
        assert config.m == 4
        assert config.tol == 1e-8
        assert config.preset == 'problem1'
        assert len(config.red_mask) == 8

    def test_json_root(self, tmp_path):
        """A config file must hold an object"""
        path = tmp_path / "config.json"
        path.write_text("[1, 2]")
        with pytest.raises(InvalidParameterError):
            ExperimentConfig.from_json(path)

    def test_unknown_preset(self):
        """Unknown presets are rejected"""
        with pytest.raises(InvalidParameterError):
            load_config(preset='problem0')

    def test_to_dict(self):
        """Config echoes as a plain dict"""
        data = ExperimentConfig(red_mask=[3]).to_dict()
        assert data['red_mask'] == [3]
        assert set(data) >= {'n', 'm', 'freq', 'alpha1', 'variant', 'tol', 'maxit'}


class TestRun:
    """Tests for run"""

    def test_report(self, report):
        """Converged run with consistent histories"""
        assert report.converged
        assert len(report.l2_history) == report.iterations + 1
        assert len(report.energy_history) == report.iterations + 1
        assert len(report.preconditioned_history) == report.iterations + 1
        assert report.l2_history[0] == 1.0
        assert report.l2_history[-1] <= 1e-6
        assert report.n_dofs == 208
        assert report.n_free == 176
        assert report.n_interfaces == 4

    def test_timings(self, report):
        """Every stage is timed"""
        assert list(report.timings) == ["mesh", "assemble", "setup", "solve"]
        assert report.total_seconds >= 0

    def test_energy_history_monotone(self, report):
        """The minimized norm never increases"""
        assert history_is_monotone(report.energy_history)
        assert not history_is_monotone([1.0, 0.5, 0.6])

    def test_direct_comparison(self):
        """compare_direct fills the direct and FE/FV distances"""
        rep = run(ExperimentConfig(n=8, m=4, freq=10, variant="nsym"), compare_direct=True)
        assert rep.direct_error <= 1e-5
        assert rep.fe_fv_distance > 0
        assert "direct" in rep.timings

    def test_stopping_norm(self, report):
        """Runs stop on the FV residual unless told otherwise"""
        assert report.config['monitor'] == 'system'
        rep = run(ExperimentConfig(n=8, m=2, freq=10, monitor='l2'))
        assert rep.converged
        assert rep.preconditioned_history[-1] <= 1e-6

    def test_json(self, report, tmp_path):
        """Reports serialize to JSON"""
        data = json.loads(report.to_json(tmp_path / "report.json").read_text())
        assert data['iterations'] == report.iterations
        assert data['config']['n'] == 8

    def test_invalid_config(self):
        """Invalid configurations fail before any stage runs"""
        with pytest.raises(InvalidParameterError):
            run(ExperimentConfig(n=8, m=3))

    def test_stage_error(self, monkeypatch):
        """A failing stage is reported by name"""
        def broken(*args, **kwargs):
            raise RuntimeError("boom")
        monkeypatch.setattr(runner, "setup", broken)
        with pytest.raises(StageError) as info:
            run(ExperimentConfig(n=4, m=2))
        assert info.value.stage == "setup"
        assert isinstance(info.value.cause, RuntimeError)


class TestSweeps:
    """Tests for alpha and grid sweeps and the CSV table"""

    def test_empty_table(self):
        """An empty sweep is the header alone"""
        assert table_csv([], []) == ",".join(CSV_HEADER) + "\n"
        assert run_table([]) == "n,m,freq,alpha1,variant,iters,cp_est,Cp_est,seconds\n"

    def test_alpha_sweep(self):
        """Seven exponents give alpha1 = 1 ... 1e6"""
        configs = alpha_sweep(ExperimentConfig(), range(7))
        assert len(configs) == 7
        assert [c.alpha1 for c in configs] == [10.0 ** k for k in range(7)]

    def test_grid_sweep(self):
        """The standard grid has 36 combinations and 21 valid cells"""
        configs = grid_sweep(ExperimentConfig(), GRID_NS, GRID_MS)
        assert len(configs) == 36
        assert sum(is_valid_cell(c) for c in configs) == 21

    def test_grid_mask(self):
        """Red masks survive only at the base subdomain count"""
        base = ExperimentConfig(m=4, red_mask=[0, 5])
        configs = grid_sweep(base, [8, 16], [4, 8])
        assert [c.red_mask for c in configs] == [[0, 5], [], [0, 5], []]

    def test_table_rows(self, tmp_path):
        """Rows follow sweep order; invalid cells keep empty result fields"""
        configs = grid_sweep(ExperimentConfig(freq=0), [4, 8], [2, 4])
        path = tmp_path / "table.csv"
        text = run_table(configs, path)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 5
        assert lines[2] == "4,4,0,1.0,sym,,,,"
        assert lines[1].startswith("4,2,0,1.0,sym,")
        assert path.read_text() == text

    def test_workers_keep_order(self):
        """A process pool returns the same rows in the same order"""
        configs = alpha_sweep(ExperimentConfig(n=8, m=2), [0, 3])
        serial = run_sweep(configs, workers=1)
        pooled = run_sweep(configs, workers=2)
        assert [r.iterations for r in serial] == [r.iterations for r in pooled]
        assert [r.config['alpha1'] for r in pooled] == [1.0, 1000.0]


class TestPlotData:
    """Tests for residual plot data"""

    def test_first_line(self, report, tmp_path):
        """Plot data starts at '0 1.0' with one line per iterate"""
        path = emit_residual_plot_data(report, tmp_path / "res.txt")
        lines = path.read_text().splitlines()
        assert lines[0] == "0 1.0"
        assert len(lines) == report.iterations + 1
        last_k, last_v = lines[-1].split()
        assert int(last_k) == report.iterations
        assert float(last_v) == report.l2_history[-1]
        assert float(last_v) <= 1e-6

    @pytest.mark.parametrize("kind, attr", [
        ("l2", "l2_history"),
        ("preconditioned", "preconditioned_history"),
        ("energy", "energy_history"),
    ])
    def test_kinds(self, report, tmp_path, kind, attr):
        """Each kind writes its own relative history"""
        path = emit_residual_plot_data(report, tmp_path / "res.txt", kind=kind)
        values = [float(line.split()[1]) for line in path.read_text().splitlines()]
        assert values == getattr(report, attr)

    def test_unknown_kind(self, report, tmp_path):
        """Unknown history kinds are rejected"""
        with pytest.raises(InvalidParameterError):
            emit_residual_plot_data(report, tmp_path / "res.txt", kind="residual")

    def test_sweep_files(self, report, tmp_path):
        """One file per run in the sweep"""
        paths = emit_sweep_plot_data([report], tmp_path / "plots")
        assert len(paths) == 1
        assert paths[0].name == "residual_n8_m2_alpha1_1e+00_sym.txt"


class TestVerify:
    """Tests for the verification suite"""

    def test_empty_subset(self):
        """An empty subset passes vacuously with a warning"""
        result = run_verify([])
        assert result['passed']
        assert result['checks'] == []
        assert result['warnings']

    def test_unknown_check(self):
        """Unknown check names are rejected"""
        with pytest.raises(InvalidParameterError):
            run_verify(['no_such_check'])

    def test_default_suite(self):
        """Slow checks are left out of the default selection"""
        assert 'form_discrepancy' not in DEFAULT_CHECKS
        assert set(DEFAULT_CHECKS) < set(CHECKS)

    def test_symmetry_check(self):
        """Exact FE symmetry passes the fe_symmetry check"""
        result = run_verify(['fe_symmetry', 'fv_fe_identity'])
        assert result['passed']
        assert [e['name'] for e in result['checks']] == ['fe_symmetry', 'fv_fe_identity']

    def test_corrupted_symmetry(self):
        """A perturbed off-diagonal entry fails the symmetry check"""
        A = build_problem(4, 2).system.A_FE.tolil()
        A[0, 1] += 1e-3
        result = run_verify(['fe_symmetry'], runners={'fe_symmetry': lambda: check_fe_symmetry(A)})
        assert not result['passed']
        assert result['failed'] == ['fe_symmetry']
        assert result['checks'][0]['measured']['max_asymmetry'] == pytest.approx(1e-3)

    def test_report_output(self, tmp_path):
        """Reports write as JSON and format as text"""
        result = run_verify(['fe_symmetry'])
        data = json.loads(write_report(result, tmp_path / "verify.json").read_text())
        assert data['passed'] is True
        assert "VERIFIED" in format_report(result)


class TestCLI:
    """Tests for crfve-bench exit codes and outputs"""

    def test_run(self, tmp_path):
        """A converged run exits 0 and writes its report"""
        out = tmp_path / "run"
        assert main(['run', '--n', '8', '--m', '2', '--quiet', '--out', str(out)]) == 0
        data = json.loads((out / 'report.json').read_text())
        assert data['converged']
        assert (out / 'residual_energy.txt').read_text().startswith("0 1.0\n")
        assert (out / 'residual_l2.txt').exists()

    def test_run_not_converged(self):
        """Hitting maxit exits 1"""
        assert main(['run', '--n', '8', '--m', '2', '--maxit', '1', '--quiet']) == 1

    def test_invalid_arguments(self, capsys):
        """Invalid parameters exit 2 with a message"""
        assert main(['run', '--n', '8', '--m', '3']) == 2
        assert "error" in capsys.readouterr().err

    def test_stage_failure(self, monkeypatch, capsys):
        """Stage failures exit 1"""
        def broken(*args, **kwargs):
            raise RuntimeError("boom")
        monkeypatch.setattr(runner, "solve", broken)
        assert main(['run', '--n', '4', '--m', '2']) == 1
        assert "solve" in capsys.readouterr().err

    def test_run_prints_summary(self, capsys):
        """Without --quiet the run is summarized"""
        assert main(['run', '--n', '8', '--m', '2', '--freq', '0', '--direct']) == 0
        out = capsys.readouterr().out
        assert "iterations" in out
        assert "direct error" in out

    @pytest.mark.parametrize("argv", [
        ['--quiet', 'run', '--n', '4', '--m', '2'],
        ['run', '--n', '4', '--m', '2', '--quiet'],
        ['-v', 'run', '--n', '4', '--m', '2', '--quiet'],
    ])
    def test_output_flags_either_position(self, argv, capsys):
        """--quiet and -v work before or after the subcommand"""
        assert main(argv) == 0
        assert capsys.readouterr().out == ""

    def test_output_flag_defaults(self):
        """Output flags default to off when omitted"""
        args = build_parser().parse_args(['verify'])
        assert not hasattr(args, 'quiet')
        assert main(['verify', '--checks', '']) == 0

    def test_monitor_flag(self, tmp_path):
        """--monitor selects the stopping residual"""
        out = tmp_path / "run"
        assert main(['run', '--n', '8', '--m', '2', '--monitor', 'l2', '--quiet', '--out', str(out)]) == 0
        data = json.loads((out / 'report.json').read_text())
        assert data['config']['monitor'] == 'l2'
        assert data['preconditioned_history'][-1] <= 1e-6
        assert (out / 'residual_preconditioned.txt').exists()

    def test_table_grid(self, tmp_path):
        """Grid sweep to a CSV file"""
        path = tmp_path / "grid.csv"
        code = main(['table', '--sweep', 'grid', '--ns', '4,8', '--ms', '2,4',
                     '--freq', '0', '--out', str(path), '--quiet'])
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 5

    def test_table_alpha(self, tmp_path, capsys):
        """Alpha sweep to stdout with plot data"""
        plots = tmp_path / "plots"
        code = main(['table', '--sweep', 'alpha', '--exponents', '0,2', '--n', '8', '--m', '2',
                     '--red-mask', '0,3', '--plot-dir', str(plots)])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1].startswith("8,2,10,1.0,sym,")
        assert lines[2].startswith("8,2,10,100.0,sym,")
        assert len(list(plots.iterdir())) == 2

    def test_verify_empty(self, capsys):
        """An empty check list passes"""
        assert main(['verify', '--checks', '']) == 0
        assert "warning" in capsys.readouterr().out

    def test_verify_unknown(self):
        """Unknown checks exit 2"""
        assert main(['verify', '--checks', 'no_such_check', '--quiet']) == 2

    def test_verify_report(self, tmp_path):
        """Verification writes a machine-readable report"""
        path = tmp_path / "verify.json"
        assert main(['verify', '--checks', 'fe_symmetry', '--out', str(path), '--quiet']) == 0
        data = json.loads(path.read_text())
        assert data['checks'][0]['name'] == 'fe_symmetry'
        assert np.isclose(data['checks'][0]['measured']['max_asymmetry'], 0.0)
