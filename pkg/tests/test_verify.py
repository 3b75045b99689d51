"""
Tests for verify module

Report bookkeeping, job planning and a small end-to-end run on the cheap
algebraic families.
"""

import math
import time

import pytest

from config import VerifyDefaults
from src.verify import (
    CHECK_FAMILIES, CheckReport, VerifyJob, check_asymptotics, check_duality, check_fourier_k, check_inequalities,
    check_kernel_identity, check_s2_suite, grid_params, job_seed, make_report, plan_jobs, run_all, select_jobs,
    wave_bound_report,
)
from src.special_functions import Periods, s2
from src.utils.errors import DomainError, ParameterError


def small_identity_job(seed, spec):
    return check_kernel_identity(n_max=2, draws=2, seed=seed)


def small_inequality_job(seed, spec):
    return check_inequalities(seed=seed, three_point_draws=2000, draws=200, n_max=3, spec=spec, wave_points=2)


def pole_job(seed, spec):
    periods = Periods(1.0, 1.41421356)
    # S2 has a pole at w1 + w2
    s2(periods.total, periods, spec)
    return []


CHEAP_JOBS = [
    VerifyJob('kernel_identity', 'kernel_identity', small_identity_job),
    VerifyJob('inequalities', 'inequalities', small_inequality_job),
]


class TestMakeReport:
    """Test the pass rule"""

    def test_within_floor(self, params):
        """Test a relative error below the floor passes"""
        report = make_report('demo', 1, params, {'x': (0.1,)}, 1 + 1e-10, 1.0, 0.0, 1e-8, 0, time.perf_counter())

        assert report.passed
        assert report.rel_err == pytest.approx(1e-10, rel=1e-3)
        assert report.tolerance == pytest.approx(1e-8)

    def test_above_floor(self, params):
        """Test an error above the floor fails"""
        report = make_report('demo', 1, params, {}, 1 + 1e-6, 1.0, 0.0, 1e-8, 0, time.perf_counter())
        assert not report.passed

    def test_error_budget_widens_tolerance(self):
        """Test the quadrature budget counts towards the tolerance"""
        report = make_report('demo', 1, None, {}, 1 + 1e-6, 1.0, 1e-6, 1e-12, 0, time.perf_counter())

        assert report.passed
        assert report.tolerance == pytest.approx(VerifyDefaults.BUDGET_SAFETY * 1e-6)

    def test_zero_rhs(self):
        """Test the relative error falls back to the absolute error"""
        report = make_report('demo', 1, None, {}, 1e-15, 0.0, 0.0, 1e-8, 0, time.perf_counter())

        assert report.rel_err == pytest.approx(1e-15)
        assert report.passed


class TestCheckReport:
    """Test report serialization"""

    def test_dict_round_trip(self, complex_params):
        """Test to_dict / from_dict"""
        report = make_report('duality', 2, complex_params, {'x': (0.1, 0.2 + 0.1j)}, 1 + 2j, 1 + 2j,
                             1e-9, 1e-7, 42, time.perf_counter(), note='sample')
        restored = CheckReport.from_dict(report.to_dict())

        assert restored == report
        assert restored.params_hash == complex_params.params_hash()

    def test_no_params(self):
        """Test reports without a parameter set"""
        report = make_report('kernel_identity', 1, None, {}, 1.0, 1.0, 0.0, 1e-10, 0, time.perf_counter())

        assert report.params_hash == ''
        assert report.to_dict()['params'] is None


class TestPlanning:
    """Test job planning and selection"""

    def test_every_family_planned(self):
        """Test the default plan covers every family"""
        assert {job.family for job in plan_jobs()} == set(CHECK_FAMILIES)

    def test_job_names_unique(self):
        """Test job names identify jobs"""
        names = [job.name for job in plan_jobs()]
        assert len(names) == len(set(names))

    def test_job_seed(self):
        """Test seeds depend on name and base seed only"""
        assert job_seed('s2[0]', 7) == job_seed('s2[0]', 7)
        assert job_seed('s2[0]', 7) != job_seed('s2[1]', 7)
        assert job_seed('s2[0]', 7) != job_seed('s2[0]', 8)

    def test_grid_respects_coupling_range(self):
        """Test every grid point satisfies 0 < Re g < Re w1 + Re w2"""
        for params in grid_params():
            assert 0 < params.g.real < (params.omega1 + params.omega2).real

    def test_real_grid(self):
        """Test the real-period restriction"""
        assert all(params.periods.is_real for params in grid_params(real_periods_only=True))

    def test_select(self):
        """Test filtering by family"""
        selected = select_jobs(plan_jobs(), ['duality', 'period_swap'])

        assert selected
        assert {job.family for job in selected} == {'duality', 'period_swap'}
        assert select_jobs(plan_jobs(), []) == []

    def test_select_unknown(self):
        """Test unknown families are refused"""
        with pytest.raises(ParameterError, match="unknown"):
            select_jobs(plan_jobs(), ['nonsense'])


class TestCheapFamilies:
    """Test the algebraic suites directly"""

    def test_kernel_identity_passes(self):
        """Test the kernel-function identity for n <= 2"""
        reports = check_kernel_identity(n_max=2, draws=3, seed=1)

        # n = 1: 2 values of r, n = 2: 3 values of r; both variants
        assert len(reports) == 3 * (2 + 3) * 2
        assert all(r.passed for r in reports)
        assert {r.relation_id for r in reports} == {'kernel_identity', 'kernel_identity_degenerate'}

    def test_inequalities_pass(self):
        """Test the fuzzed inequalities and the c_n sandwich"""
        reports = check_inequalities(seed=3, three_point_draws=2000, draws=200, n_max=3, wave_points=3)

        assert all(r.passed for r in reports)
        # three-point, three inequalities for n = 2 and 3, sandwich, wave-function bound
        assert len(reports) == 1 + 3 * 2 + 1 + 1

    def test_wave_bound_reported(self, params, spec):
        """Test the empirical wave-function bound constant is carried in the report"""
        report = wave_bound_report(params, spec, seed=4, points=3)

        assert report.relation_id == 'wave_bound'
        assert report.passed
        assert 0 < report.rhs.real <= report.lhs.real
        assert 'over 3 points' in report.note

    def test_wave_bound_optional(self):
        """Test wave_points = 0 leaves only the fuzzed inequalities"""
        reports = check_inequalities(seed=3, three_point_draws=2000, draws=200, n_max=2, wave_points=0)

        assert 'wave_bound' not in {r.relation_id for r in reports}


@pytest.mark.integration
class TestRunAll:
    """Test the orchestration"""

    def test_summary(self, clean_perf_tracker):
        """Test a run over the cheap jobs"""
        summary = run_all(seed=5, threads=2, jobs=CHEAP_JOBS)

        assert summary.passed
        assert summary.counts['failed'] == 0
        assert summary.counts['total'] == len(summary.reports)
        assert set(summary.job_stats) == {'kernel_identity', 'inequalities'}
        assert 'memory' in summary.resources

    def test_reports_sorted(self):
        """Test reports come back sorted by relation"""
        summary = run_all(seed=5, threads=1, jobs=CHEAP_JOBS)
        ids = [r.relation_id for r in summary.reports]

        assert ids == sorted(ids)

    def test_deterministic(self):
        """Test the same seed gives the same outcome for any thread count"""
        first = run_all(seed=9, threads=1, jobs=CHEAP_JOBS)
        second = run_all(seed=9, threads=2, jobs=CHEAP_JOBS)

        assert [r.lhs for r in first.reports] == [r.lhs for r in second.reports]

    def test_filter(self):
        """Test the family filter on an explicit job list"""
        summary = run_all(checks=['inequalities'], seed=1, threads=1, jobs=CHEAP_JOBS)
        assert {r.relation_id for r in summary.reports} >= {'three_point', 'c_n_sandwich'}
        assert 'kernel_identity' not in {r.relation_id for r in summary.reports}

    def test_summary_dict(self):
        """Test the summary serialization"""
        data = run_all(seed=1, threads=1, jobs=CHEAP_JOBS).to_dict()

        assert data['seed'] == 1
        assert data['passed'] is True
        assert math.isfinite(data['max_rel_err']['kernel_identity'])

    def test_pole_job_fails_alone(self, clean_perf_tracker):
        """Test a job stopped at a pole becomes one failed report while the other jobs run"""
        jobs = CHEAP_JOBS + [VerifyJob('s2_pole', 's2', pole_job)]
        summary = run_all(seed=5, threads=2, jobs=jobs)
        failed = [r for r in summary.reports if not r.passed]

        assert not summary.passed
        assert len(failed) == 1
        assert failed[0].relation_id == 's2'
        assert failed[0].note.startswith('s2_pole: NearPoleError')
        assert {'kernel_identity', 'c_n_sandwich'} <= {r.relation_id for r in summary.reports}

    def test_stats_cover_one_run(self, clean_perf_tracker):
        """Test repeated runs report only their own job timings"""
        run_all(seed=5, threads=1, jobs=CHEAP_JOBS)
        summary = run_all(seed=5, threads=1, jobs=CHEAP_JOBS)

        assert summary.job_stats['kernel_identity']['count'] == 1
        assert summary.job_stats['inequalities']['count'] == 1


class TestNumericFamilies:
    """Test the quadrature-backed suites on small samples"""

    def test_s2_suite(self, params, spec):
        """Test the functional equations at four random points"""
        reports = check_s2_suite(params, spec, samples=4, seed=2)

        # six relations per point, three homogeneity factors, value at w1, zero
        assert len(reports) == 6 * 4 + 3 + 2
        assert sum(r.relation_id == 's2_ladder' for r in reports) == 4
        assert all(r.passed for r in reports), [r.to_dict() for r in reports if not r.passed]

    def test_fourier_k(self, params, spec):
        """Test the Fourier transform of K on the real line and near the strip edge"""
        edge = 0.2 * params.nu_g
        reports = check_fourier_k(params, lams=[0.0, 0.35, 0.1 + 1j * edge], spec=spec)

        assert [r.relation_id for r in reports] == ['fourier_k', 'fourier_k', 'fourier_k_edge']
        assert all(r.passed for r in reports)

    def test_asymptotics(self, params, spec):
        """Test mu and K against their exponentials"""
        reports = check_asymptotics(params, spec)

        assert len(reports) == 12
        assert all(r.passed for r in reports)

    def test_asymptotics_need_real_periods(self, complex_params, spec):
        """Test complex periods are refused"""
        with pytest.raises(DomainError):
            check_asymptotics(complex_params, spec)

    def test_duality_particle_numbers(self, params):
        """Test duality is only checked for n = 2, 3"""
        with pytest.raises(ParameterError):
            check_duality(4, params)
