"""
Tests for the command-line interface

Exit codes, written records and the report round trip through the CLI.
"""

import cmath
import json
import math
import time

import pandas as pd
import pytest
from click.testing import CliRunner

from main import EXIT_DOMAIN, EXIT_FAILED, EXIT_OK, EXIT_USAGE, cli
from src.services.report_service import ReportService
from src.verify import make_report

PARAMS = ['--omega1', '1', '--omega2', '1.41421356', '--g', '0.6']


@pytest.fixture
def runner():
    return CliRunner()


class TestEval:
    """Test the eval command"""

    def test_s2(self, runner):
        """Test a plain evaluation succeeds"""
        result = runner.invoke(cli, ['eval', 's2', '--z', '0.5+0i', *PARAMS])

        assert result.exit_code == EXIT_OK, result.output
        assert 's2' in result.output

    def test_plane_wave_record(self, runner, temp_dir):
        """Test Psi_1 written to a JSON record"""
        path = temp_dir / 'psi.json'
        result = runner.invoke(cli, ['eval', 'psi', '--n', '1', '--lambda', '0.3', '--x', '0.7', *PARAMS,
                                     '-o', str(path)])

        assert result.exit_code == EXIT_OK, result.output
        record = json.loads(path.read_text())
        expected = cmath.exp(2j * math.pi * 0.21)
        assert record['value'] == pytest.approx([expected.real, expected.imag], abs=1e-15)
        assert record['err_est'] == 0.0

    def test_config_file(self, runner, temp_dir):
        """Test settings read from a key=value file"""
        path = temp_dir / 'run.cfg'
        path.write_text("omega1 = 1\nomega2 = 1.41421356\ng = 0.6\nrel_tol = 1e-9\n")

        result = runner.invoke(cli, ['eval', 'k', '--x', '0.4', '--config', str(path)])
        assert result.exit_code == EXIT_OK, result.output

    def test_bad_complex(self, runner):
        """Test unparseable numbers are usage errors"""
        result = runner.invoke(cli, ['eval', 's2', '--z', '1+', *PARAMS])
        assert result.exit_code == EXIT_USAGE

    def test_unknown_target(self, runner):
        """Test click choices"""
        result = runner.invoke(cli, ['eval', 'zeta', *PARAMS])
        assert result.exit_code == EXIT_USAGE

    def test_spectral_strip_violation(self, runner):
        """Test a lambda strip violation exits with the domain code"""
        result = runner.invoke(cli, ['eval', 'psi', '--n', '2', '--lambda', '0.3+0.05i,-0.2', '--x', '0.1,0.5',
                                     *PARAMS])

        assert result.exit_code == EXIT_DOMAIN
        assert 'theta' in result.output

    def test_invalid_coupling(self, runner):
        """Test parameter invariants exit with the domain code"""
        result = runner.invoke(cli, ['eval', 's2', '--omega1', '1', '--omega2', '1', '--g', '5'])
        assert result.exit_code == EXIT_DOMAIN


class TestSweep:
    """Test the sweep command"""

    def test_csv_output(self, runner, temp_dir):
        """Test plot-ready CSV columns"""
        path = temp_dir / 'k.csv'
        result = runner.invoke(cli, ['sweep', 'k', '--axis', 'x', '--start', '-2', '--stop', '2', '--steps', '9',
                                     '--x', '0', *PARAMS, '--format', 'csv', '-o', str(path)])

        assert result.exit_code == EXIT_OK, result.output
        frame = pd.read_csv(path)
        assert list(frame.columns) == ['axis_value', 're', 'im', 'err_est']
        assert len(frame) == 9
        # K is even
        assert frame['re'].iloc[0] == pytest.approx(frame['re'].iloc[-1], rel=1e-10)

    def test_zero_steps(self, runner):
        """Test at least one step is required"""
        result = runner.invoke(cli, ['sweep', 'k', '--start', '0', '--stop', '1', '--steps', '0', '--x', '0',
                                     *PARAMS])
        assert result.exit_code == EXIT_USAGE


@pytest.mark.integration
class TestVerify:
    """Test the verify command on the kernel-function identity"""

    def test_writes_reports(self, runner, temp_dir):
        """Test a filtered run writes JSON and CSV"""
        result = runner.invoke(cli, ['verify', '--filter', 'kernel_identity', '--seed', '7', '-o', str(temp_dir)])

        assert result.exit_code == EXIT_OK, result.output
        assert (temp_dir / 'reports_seed7.json').exists()
        assert (temp_dir / 'summary_seed7.csv').exists()

    def test_same_seed_same_reports(self, runner, temp_dir):
        """Test determinism across runs"""
        bodies = []
        for name in ('a', 'b'):
            out = temp_dir / name
            runner.invoke(cli, ['verify', '--filter', 'kernel_identity', '--seed', '7', '-o', str(out)])
            reports = ReportService.load_reports(out / 'reports_seed7.json')
            bodies.append([(r.relation_id, r.sample, r.lhs, r.rhs) for r in reports])

        assert bodies[0] == bodies[1]

    def test_unknown_filter(self, runner, temp_dir):
        """Test unknown families are usage errors"""
        result = runner.invoke(cli, ['verify', '--filter', 'nonsense', '-o', str(temp_dir)])
        assert result.exit_code == EXIT_USAGE


class TestReport:
    """Test the report command"""

    def write(self, temp_dir, params, rhs):
        started = time.perf_counter()
        reports = [make_report('duality', 2, params, {'x': (0.1, 0.5)}, 1.0, rhs, 0.0, 1e-7, 1, started)]
        return ReportService(temp_dir).write_reports(reports, 'reports')

    def test_passing_reports(self, runner, temp_dir, params):
        """Test a passing file and the written summary"""
        path = self.write(temp_dir, params, 1.0)
        summary = temp_dir / 'summary.csv'
        result = runner.invoke(cli, ['report', str(path), '-o', str(summary)])

        assert result.exit_code == EXIT_OK, result.output
        assert pd.read_csv(summary)['relation_id'].tolist() == ['duality']

    def test_failed_reports(self, runner, temp_dir, params):
        """Test a failed report gives exit code 4"""
        path = self.write(temp_dir, params, 1.5)
        result = runner.invoke(cli, ['report', str(path)])

        assert result.exit_code == EXIT_FAILED

    def test_unreadable_file(self, runner, temp_dir):
        """Test a file that is not a report list"""
        path = temp_dir / 'bad.json'
        path.write_text('{}')

        result = runner.invoke(cli, ['report', str(path)])
        assert result.exit_code == EXIT_USAGE
