"""
Verification Suites

Every identity the package relies on, checked numerically at seeded sample
points and recorded as CheckReport objects. A report passes when

    abs_err <= max(tolerance, err_budget),  tolerance = max(floor |rhs|, abs_floor, 3 err_budget)

where err_budget is the summed quadrature error estimate of both sides.
Strip guards raise DomainError instead of running a check outside its
convergence region; numerical failures inside a check become failed reports.
In run_all a job stopped by a DomainError becomes one failed report and the
remaining jobs still run.
"""

import logging
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config, VerifyDefaults
from src.inequalities import (
    FuzzResult, c_n_sandwich, fuzz_s_bound, fuzz_s_top_bound, fuzz_t_bound, fuzz_three_point, wave_bound_ratio,
)
from src.model import (
    DEFAULT_SPEC, ComplexTuple, ModelParams, k_asymptotic, k_hat, kfun, mu, mu_asymptotic,
)
from src.operators import (
    OperatorHandle, OperatorKind, apply, composed_qq_kernel, dual_macdonald_apply, elementary_symmetric,
    fourier_k, kernel_identity_sides, macdonald_coefficients, macdonald_shift, ql_exchange_sides,
)
from src.quadrature import QuadratureSpec
from src.special_functions import s2
from src.utils.errors import DomainError, ParameterError, SingularCoefficientError, ToleranceError
from src.utils.logging import job_context, log_exception, setup_logger
from src.utils.monitoring import monitor_performance, perf_tracker, resource_snapshot, timed
from src.wavefunction import (
    WaveSpec, psi, psi_dual, psi_function, psi_mixed, psi_spectral_function, symmetric_orders, theta,
)

logger = setup_logger(__name__)

CHECK_FAMILIES = (
    's2', 'fourier_k', 'asymptotics', 'qq_commutativity', 'ql_exchange', 'q_eigen', 'dual_q_eigen',
    'duality', 'macdonald', 'dual_macdonald', 'lambda_symmetry', 'x_symmetry', 'period_swap',
    'kernel_identity', 'inequalities',
)
BASE_PERIODS = VerifyDefaults.DEFAULT_PERIODS[0]


def _pair(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


def _unpair(value: Sequence[float]) -> complex:
    return complex(value[0], value[1])


@dataclass
class CheckReport:
    """Pass/fail record of one identity at one parameter set and sample point"""
    relation_id: str
    n: int
    params: Optional[ModelParams]
    sample: Dict[str, Tuple[complex, ...]]
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    tolerance: float
    err_budget: float
    passed: bool
    runtime_ms: float
    seed: int
    note: str = ''

    @property
    def params_hash(self) -> str:
        return self.params.params_hash() if self.params is not None else ''

    def to_dict(self) -> Dict:
        return {
            'relation_id': self.relation_id,
            'n': self.n,
            'params': self.params.to_dict() if self.params is not None else None,
            'sample': {key: [_pair(v) for v in values] for key, values in self.sample.items()},
            'lhs': _pair(self.lhs),
            'rhs': _pair(self.rhs),
            'abs_err': self.abs_err,
            'rel_err': self.rel_err,
            'tolerance': self.tolerance,
            'err_budget': self.err_budget,
            'passed': self.passed,
            'runtime_ms': self.runtime_ms,
            'seed': self.seed,
            'note': self.note,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'CheckReport':
        params = data.get('params')
        return cls(
            relation_id=data['relation_id'],
            n=int(data['n']),
            params=ModelParams.from_dict(params) if params is not None else None,
            sample={key: tuple(_unpair(v) for v in values) for key, values in data['sample'].items()},
            lhs=_unpair(data['lhs']),
            rhs=_unpair(data['rhs']),
            abs_err=float(data['abs_err']),
            rel_err=float(data['rel_err']),
            tolerance=float(data['tolerance']),
            err_budget=float(data['err_budget']),
            passed=bool(data['passed']),
            runtime_ms=float(data['runtime_ms']),
            seed=int(data['seed']),
            note=data.get('note', ''),
        )


def make_report(relation_id: str, n: int, params: Optional[ModelParams], sample: Dict[str, Sequence[complex]],
                lhs: complex, rhs: complex, err_budget: float, floor: float, seed: int,
                started: float, note: str = '') -> CheckReport:
    """Build a report, deriving errors, tolerance and the pass flag"""
    lhs, rhs = complex(lhs), complex(rhs)
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / abs(rhs) if rhs != 0 else abs_err
    tolerance = max(floor * abs(rhs), VerifyDefaults.ABS_FLOOR, VerifyDefaults.BUDGET_SAFETY * err_budget)
    passed = bool(abs_err <= max(tolerance, err_budget))
    report = CheckReport(
        relation_id=relation_id,
        n=n,
        params=params,
        sample={key: tuple(complex(v) for v in values) for key, values in sample.items()},
        lhs=lhs,
        rhs=rhs,
        abs_err=float(abs_err),
        rel_err=float(rel_err),
        tolerance=float(tolerance),
        err_budget=float(err_budget),
        passed=passed,
        runtime_ms=1000.0 * (time.perf_counter() - started),
        seed=seed,
        note=note,
    )
    if passed:
        logger.debug(f"{relation_id} (n = {n}) passed: rel_err {rel_err:.2e}")
    else:
        logger.warning(f"{relation_id} (n = {n}) failed: abs_err {abs_err:.3e} above tolerance {tolerance:.3e}")
    return report


def _failed_report(relation_id: str, n: int, params: Optional[ModelParams], sample: Dict[str, Sequence[complex]],
                   seed: int, started: float, exc: Exception) -> CheckReport:
    log_exception(logger, exc, f"{relation_id} (n = {n})", level=logging.WARNING)
    return CheckReport(
        relation_id=relation_id, n=n, params=params,
        sample={key: tuple(complex(v) for v in values) for key, values in sample.items()},
        lhs=complex(math.nan, 0.0), rhs=complex(math.nan, 0.0), abs_err=math.inf, rel_err=math.inf,
        tolerance=0.0, err_budget=0.0, passed=False,
        runtime_ms=1000.0 * (time.perf_counter() - started), seed=seed,
        note=f"{type(exc).__name__}: {exc}",
    )


def _run_sample(relation_id: str, n: int, params: Optional[ModelParams], sample: Dict[str, Sequence[complex]],
                floor: float, seed: int, compute: Callable[[], Tuple[complex, complex, float]],
                note: str = '') -> CheckReport:
    """Evaluate both sides; numerical failures become a failed report, domain errors propagate"""
    started = time.perf_counter()
    try:
        lhs, rhs, budget = compute()
    except ToleranceError as exc:
        return _failed_report(relation_id, n, params, sample, seed, started, exc)
    return make_report(relation_id, n, params, sample, lhs, rhs, budget, floor, seed, started, note)


def working_spec(spec: QuadratureSpec, floor: float, seed: int) -> QuadratureSpec:
    """Integrator settings for a check with the given relative floor"""
    tol = floor / VerifyDefaults.WORKING_TOL_FACTOR
    return spec.loosened(abs_tol=tol, rel_tol=tol).with_overrides(seed=seed)


class SampleDrawer:
    """Seeded sample points for the checks"""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def coordinates(self, k: int, bound: float = VerifyDefaults.SAMPLE_BOUND) -> ComplexTuple:
        half = 0.5 * bound
        return ComplexTuple(tuple(self.rng.uniform(-half, half, size=k)))

    def spectral(self, k: int, imag_width: float = 0.0,
                 bound: float = VerifyDefaults.LAMBDA_BOUND) -> ComplexTuple:
        """Real parts in [-bound, bound], imaginary parts in [-imag_width / 2, imag_width / 2]"""
        real = self.rng.uniform(-bound, bound, size=k)
        imag = self.rng.uniform(-0.5, 0.5, size=k) * imag_width
        return ComplexTuple(tuple(real + 1j * imag))

    def complex_point(self, k: int, real_range: Tuple[float, float], imag_bound: float) -> ComplexTuple:
        real = self.rng.uniform(*real_range, size=k)
        imag = self.rng.uniform(-imag_bound, imag_bound, size=k)
        return ComplexTuple(tuple(real + 1j * imag))


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

@monitor_performance
def check_s2_suite(params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC, samples: int = VerifyDefaults.S2_SAMPLES,
                   seed: int = 0) -> List[CheckReport]:
    """
    Functional equations of S2 at random points: both shift relations, inversion,
    reflection, period symmetry, two shifts by w1, homogeneity and the value at w1
    """
    periods = params.periods
    floor = VerifyDefaults.FLOORS['s2_real' if periods.is_real else 's2_complex']
    work = working_spec(spec, floor, seed)
    drawer = SampleDrawer(seed)
    w1, w2 = periods.omega1, periods.omega2
    total = periods.total.real
    points = drawer.complex_point(samples, (0.1 * total, 0.9 * total), 0.5 * total).as_array()

    reports = []
    started = time.perf_counter()
    base = np.asarray(s2(points, periods, work))
    swapped = np.asarray(s2(points, periods.swapped(), work))
    shifted_1 = np.asarray(s2(points + w1, periods, work))
    shifted_2 = np.asarray(s2(points + w2, periods, work))
    inverted = np.asarray(s2(periods.total - points, periods, work))
    reflected = np.asarray(s2(-points, periods, work))
    laddered = np.asarray(s2(points + 2 * w1, periods, work))
    per_point = (time.perf_counter() - started) / max(samples, 1)

    suites = [
        ('s2_shift_1', base / shifted_1, 2 * np.sin(np.pi * points / w2), floor),
        ('s2_shift_2', base / shifted_2, 2 * np.sin(np.pi * points / w1), floor),
        ('s2_inversion', base * inverted, np.ones(samples), floor),
        ('s2_reflection', base * reflected, -4 * np.sin(np.pi * points / w1) * np.sin(np.pi * points / w2),
         max(floor, VerifyDefaults.FLOORS['s2_reflection'])),
        ('s2_period_symmetry', swapped, base, floor),
        ('s2_ladder', laddered * 4 * np.sin(np.pi * (points + w1) / w2) * np.sin(np.pi * points / w2), base,
         max(floor, VerifyDefaults.FLOORS['s2_ladder'])),
    ]
    for relation_id, lhs, rhs, rel_floor in suites:
        for z, left, right in zip(points, lhs, rhs):
            reports.append(make_report(relation_id, 1, params, {'z': (z,)}, left, right, 0.0, rel_floor, seed,
                                       time.perf_counter() - per_point))

    for gamma in (0.5, 2.0, 3.7):
        scaled = periods.scaled(gamma)
        for z in points[:max(1, samples // 10)]:
            reports.append(_run_sample(
                's2_homogeneity', 1, params, {'z': (z,), 'gamma': (gamma,)}, floor, seed,
                lambda z=z, scaled=scaled, gamma=gamma: (s2(gamma * z, scaled, work), s2(z, periods, work), 0.0)))

    reports.append(_run_sample(
        's2_at_omega1', 1, params, {'z': (w1,)}, floor, seed,
        lambda: (s2(w1, periods, work), np.sqrt(w2 / w1), 0.0)))
    reports.append(_run_sample(
        's2_zero', 1, params, {'z': (0j,)}, floor, seed,
        lambda: (s2(0.0, periods, work), 0.0, 0.0)))
    return reports


@monitor_performance
def check_fourier_k(params: ModelParams, lams: Optional[Sequence[complex]] = None,
                    spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0) -> List[CheckReport]:
    """Quadrature of the Fourier transform of K against sqrt(w1 w2) S2(g) K^(lambda)"""
    edge = 0.4 * 0.5 * params.nu_g
    if lams is None:
        count = VerifyDefaults.FOURIER_GRID
        real = np.linspace(-1.0, 1.0, count // 2)
        lams = list(real) + list(real + 1j * edge * np.where(np.arange(len(real)) % 2, 1.0, -1.0))

    reports = []
    for lam in lams:
        lam = complex(lam)
        relation = 'fourier_k_edge' if lam.imag != 0 else 'fourier_k'
        floor = VerifyDefaults.FLOORS[relation]
        work = working_spec(spec, floor, seed)

        def compute(lam=lam, work=work):
            (value, err), exact = fourier_k(lam, params, work)
            return value, exact, err

        reports.append(_run_sample(relation, 1, params, {'lambda': (lam,)}, floor, seed, compute))
    return reports


@monitor_performance
def check_asymptotics(params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0) -> List[CheckReport]:
    """mu and K against their leading exponentials; tolerance 10 / |x|"""
    if not params.periods.is_real:
        raise DomainError("asymptotic checks need real periods")
    work = working_spec(spec, VerifyDefaults.FLOORS['mu_k_asymptotics'], seed)
    reports = []
    for radius in VerifyDefaults.ASYMPTOTIC_RADII:
        for sign in (-1.0, 1.0):
            x = sign * radius / params.nu_g
            floor = 10.0 / abs(x)
            reports.append(_run_sample(
                'mu_asymptotics', 1, params, {'x': (x,)}, floor, seed,
                lambda x=x: (mu(x, params, work) / mu_asymptotic(x, params), 1.0, 0.0)))
            reports.append(_run_sample(
                'k_asymptotics', 1, params, {'x': (x,)}, floor, seed,
                lambda x=x: (kfun(x, params, work) / k_asymptotic(x, params), 1.0, 0.0)))
    return reports


# ---------------------------------------------------------------------------
# Operator identities
# ---------------------------------------------------------------------------

def _samples(relation: str, samples: Optional[int]) -> int:
    return samples if samples is not None else VerifyDefaults.SAMPLES[relation]


@monitor_performance
def check_qq_commutativity(n: int, params: ModelParams, samples: Optional[int] = None,
                           spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0) -> List[CheckReport]:
    """Kernel of Q_n(lambda) Q_n(rho) against the kernel with lambda and rho exchanged"""
    if n not in (1, 2):
        raise ParameterError(f"Q commutativity is checked for n = 1, 2 (got {n})")
    relation = f'qq_commutativity_{n}'
    floor = VerifyDefaults.FLOORS[relation]
    work = working_spec(spec, floor, seed)
    drawer = SampleDrawer(seed)
    reports = []
    for _ in range(_samples(relation, samples)):
        x, z = drawer.coordinates(n), drawer.coordinates(n)
        lam, rho = drawer.spectral(2, imag_width=0.45 * params.nu_g)

        def compute(x=x, z=z, lam=lam, rho=rho):
            left, left_err = composed_qq_kernel(x, z, lam, rho, params, work)
            right, right_err = composed_qq_kernel(x, z, rho, lam, params, work)
            return left, right, left_err + right_err

        reports.append(_run_sample('qq_commutativity', n, params,
                                   {'x': x.values, 'z': z.values, 'lambda': (lam,), 'rho': (rho,)},
                                   floor, seed, compute))
    return reports


@monitor_performance
def check_ql_exchange(params: ModelParams, samples: Optional[int] = None, spec: QuadratureSpec = DEFAULT_SPEC,
                      seed: int = 0, n: int = 2) -> List[CheckReport]:
    """Kernels of Q_n(lambda) Lambda_n(rho) and K^(lambda - rho) Lambda_n(rho) Q_{n-1}(lambda)"""
    if n != 2:
        raise ParameterError(f"the Q-Lambda exchange is checked for n = 2 (got {n})")
    floor = VerifyDefaults.FLOORS['ql_exchange']
    work = working_spec(spec, floor, seed)
    drawer = SampleDrawer(seed)
    reports = []
    for _ in range(_samples('ql_exchange', samples)):
        x, z = drawer.coordinates(n), drawer.coordinates(n - 1)
        lam, rho = drawer.spectral(2, imag_width=0.45 * 0.5 * params.nu_g)

        def compute(x=x, z=z, lam=lam, rho=rho):
            (left, left_err), (right, right_err) = ql_exchange_sides(x, z, lam, rho, params, work)
            return left, right, left_err + right_err

        reports.append(_run_sample('ql_exchange', n, params,
                                   {'x': x.values, 'z': z.values, 'lambda': (lam,), 'rho': (rho,)},
                                   floor, seed, compute))
    return reports


def _eigen_inputs(drawer: SampleDrawer, n: int, params: ModelParams, eps: float) -> Tuple[ComplexTuple, ComplexTuple]:
    width = 0.8 * theta(eps, n, params) if n > 1 else 0.0
    return drawer.spectral(n, imag_width=width), drawer.coordinates(n)


@monitor_performance
def check_q_eigen(n: int, params: ModelParams, samples: Optional[int] = None, spec: QuadratureSpec = DEFAULT_SPEC,
                  seed: int = 0, eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """Q_n(lambda) Psi_{lambda_n} = prod_j K^(lambda - lambda_j) Psi_{lambda_n}"""
    if n not in (1, 2):
        raise ParameterError(f"the Q eigenvalue relation is checked for n = 1, 2 (got {n})")
    relation = f'q_eigen_{n}'
    floor = VerifyDefaults.FLOORS[relation]
    work = working_spec(spec, floor, seed)
    drawer = SampleDrawer(seed)
    reports = []
    for _ in range(_samples(relation, samples)):
        lam_n, x = _eigen_inputs(drawer, n, params, eps)
        lam = drawer.spectral(1, imag_width=0.3 * params.nu_g * (1 - eps))[0]
        reports.append(q_eigen_report(n, params, lam_n, x, lam, work, seed, eps))
    return reports


def q_eigen_report(n: int, params: ModelParams, lam_n: Sequence[complex], x: Sequence[complex], lam: complex,
                   spec: QuadratureSpec, seed: int, eps: float = VerifyDefaults.EPSILON) -> CheckReport:
    """One sample of the Q eigenvalue relation"""
    wave = WaveSpec(n, lam_n, x, params, spec, eps)
    gap = abs((lam - wave.lam[-1]).imag)
    if not gap < 0.5 * params.nu_g * (1 - eps):
        raise DomainError(f"|Im(lambda - lambda_n)| = {gap:.4g} leaves the strip nu_g (1 - eps) / 2")

    def compute():
        op = OperatorHandle(OperatorKind.Q, n, lam, params, spec)
        left, left_err = apply(op, psi_function(wave.lam, params, spec, eps), wave.x)
        value, err = psi(wave)
        eigenvalue = complex(np.prod([k_hat(lam - l, params, spec) for l in wave.lam]))
        return left, eigenvalue * value, left_err + abs(eigenvalue) * err

    return _run_sample('q_eigen', n, params, {'lambda_n': wave.lam.values, 'x': wave.x.values, 'lambda': (lam,)},
                       VerifyDefaults.FLOORS[f'q_eigen_{n}'], seed, compute)


@monitor_performance
def check_dual_q_eigen(n: int, params: ModelParams, samples: Optional[int] = None,
                       spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                       eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """Q^_n(x) acting on the spectral variables: eigenvalue prod_j K(x - x_j)"""
    if n not in (1, 2):
        raise ParameterError(f"the dual Q eigenvalue relation is checked for n = 1, 2 (got {n})")
    relation = f'dual_q_eigen_{n}'
    floor = VerifyDefaults.FLOORS[relation]
    work = working_spec(spec, floor, seed)
    dual = params.dual()
    drawer = SampleDrawer(seed)
    reports = []
    for _ in range(_samples(relation, samples)):
        lam_n, x = _eigen_inputs(drawer, n, params, eps)
        x_param = drawer.spectral(1, imag_width=0.3 * dual.nu_g * (1 - eps), bound=0.5 * VerifyDefaults.SAMPLE_BOUND)[0]
        wave = WaveSpec(n, lam_n, x, params, work, eps)
        gap = abs((x_param - wave.x[-1]).imag)
        if not gap < 0.5 * dual.nu_g * (1 - eps):
            raise DomainError(f"|Im(x - x_n)| = {gap:.4g} leaves the dual strip")

        def compute(wave=wave, x_param=x_param):
            op = OperatorHandle(OperatorKind.Q_DUAL, n, x_param, params, work)
            f = psi_spectral_function(wave.x, params, work, eps)
            left, left_err = apply(op, f, wave.lam)
            value, err = psi(wave)
            eigenvalue = complex(np.prod([kfun(x_param - p, params, work) for p in wave.x]))
            return left, eigenvalue * value, left_err + abs(eigenvalue) * err

        reports.append(_run_sample('dual_q_eigen', n, params,
                                   {'lambda_n': wave.lam.values, 'x': wave.x.values, 'x_param': (x_param,)},
                                   floor, seed, compute))
    return reports


# ---------------------------------------------------------------------------
# Wave-function identities
# ---------------------------------------------------------------------------

def _wave_samples(drawer: SampleDrawer, n: int, params: ModelParams, spec: QuadratureSpec, eps: float,
                  count: int) -> List[WaveSpec]:
    waves = []
    for _ in range(count):
        lam, x = _eigen_inputs(drawer, n, params, eps)
        waves.append(WaveSpec(n, lam, x, params, spec, eps))
    return waves


def _compare_waves(relation: str, n: int, wave: WaveSpec, left: Callable[[], Tuple[complex, float]],
                   right: Callable[[], Tuple[complex, float]], floor: float, seed: int,
                   extra: Optional[Dict[str, Sequence[complex]]] = None) -> CheckReport:
    def compute():
        a, a_err = left()
        b, b_err = right()
        return a, b, a_err + b_err

    sample = {'lambda': wave.lam.values, 'x': wave.x.values}
    sample.update(extra or {})
    return _run_sample(relation, n, wave.params, sample, floor, seed, compute)


@monitor_performance
def check_duality(n: int, params: ModelParams, samples: Optional[int] = None, spec: QuadratureSpec = DEFAULT_SPEC,
                  seed: int = 0, eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """
    Psi_lambda(x; g | w) = Psi_x(lambda; g*^ | w^), plus the mixed representation
    of the same function
    """
    if n not in (2, 3):
        raise ParameterError(f"duality is checked for n = 2, 3 (got {n})")
    if not params.periods.is_real:
        raise DomainError("duality is checked for real positive periods")
    params.dual()  # ParameterError unless Re g* > 0
    relation = f'duality_{n}'
    floor = VerifyDefaults.FLOORS[relation]
    work = working_spec(spec, floor, seed)
    reports = []
    for wave in _wave_samples(SampleDrawer(seed), n, params, work, eps, _samples(relation, samples)):
        reports.append(_compare_waves('duality', n, wave, lambda w=wave: psi(w), lambda w=wave: psi_dual(w),
                                      floor, seed))
        reports.append(_compare_waves('mixed_representation', n, wave, lambda w=wave: psi(w),
                                      lambda w=wave: psi_mixed(w), floor, seed))
    return reports


def _macdonald_regime(params: ModelParams, label: str):
    w1 = params.omega1
    if not (params.periods.is_real and w1.real < 0.5 * params.g_star.real and params.g.real < params.omega2.real):
        raise DomainError(f"{label}: need real periods with w1 < Re g*/2 and Re g < w2 ({params})")


def _macdonald_side(r: int, evaluate: Callable[[ComplexTuple], Tuple[complex, float]], x: ComplexTuple,
                    params: ModelParams) -> Tuple[complex, float]:
    """sum_I coefficient_I f(x shifted on I), with the summed error estimates"""
    total, budget = 0.0 + 0.0j, 0.0
    for subset, coefficient in macdonald_coefficients(r, x, params):
        value, err = evaluate(macdonald_shift(x, subset, params))
        total += coefficient * value
        budget += abs(coefficient) * err
    return total, budget


@monitor_performance
def check_macdonald(n: int, r: int, params: ModelParams, samples: Optional[int] = None,
                    spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                    eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """M_r Psi_lambda = e_r(e^{2 pi lambda_j w1}) Psi_lambda"""
    if n not in (1, 2):
        raise ParameterError(f"the Macdonald relation is checked for n = 1, 2 (got {n})")
    _macdonald_regime(params, "Macdonald check")
    relation = f'macdonald_{n}'
    floor = VerifyDefaults.FLOORS[relation]
    work = working_spec(spec, floor, seed)
    reports = []
    for wave in _wave_samples(SampleDrawer(seed), n, params, work, eps, _samples(relation, samples)):
        def compute(wave=wave):
            left, left_err = _macdonald_side(r, lambda pt: psi(wave.with_x(pt)), wave.x, params)
            value, err = psi(wave)
            eigenvalue = elementary_symmetric(r, [np.exp(2 * math.pi * l * params.omega1) for l in wave.lam])
            return left, eigenvalue * value, left_err + abs(eigenvalue) * err

        try:
            reports.append(_run_sample('macdonald', n, params,
                                       {'lambda': wave.lam.values, 'x': wave.x.values, 'r': (r,)},
                                       floor, seed, compute))
        except SingularCoefficientError as exc:
            logger.warning(f"Skipping a Macdonald sample with coinciding coordinates: {exc}")
    return reports


@monitor_performance
def check_dual_macdonald(n: int, s: int, params: ModelParams, samples: Optional[int] = None,
                         spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                         eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """
    Dual Macdonald operators acting on the spectral variables:
    M^_s Psi_lambda(x) = e_s(e^{2 pi x_j w1^}) Psi_lambda(x), with w1^ = 1 / w2
    """
    if n not in (1, 2):
        raise ParameterError(f"the dual Macdonald relation is checked for n = 1, 2 (got {n})")
    dual = params.dual()
    _macdonald_regime(dual, "dual Macdonald check")
    floor = VerifyDefaults.FLOORS['dual_macdonald' if n > 1 else 'macdonald_1']
    work = working_spec(spec, floor, seed)
    reports = []
    drawer = SampleDrawer(seed)
    for _ in range(_samples('dual_macdonald', samples)):
        # the dual function takes the original spectral values as coordinates
        lam, x = drawer.coordinates(n), drawer.spectral(n)
        wave = WaveSpec(n, x, lam, dual, work, eps)

        def compute(wave=wave):
            errors = []

            def shifted(pt):
                value, err = psi(wave.with_x(pt))
                errors.append(err)
                return value

            left = dual_macdonald_apply(s, shifted, wave.x, params)
            # one psi call per subset, in coefficient order
            weights = [abs(c) for _, c in macdonald_coefficients(s, wave.x, dual)]
            left_err = sum(w * e for w, e in zip(weights, errors))
            value, err = psi(wave)
            eigenvalue = elementary_symmetric(s, [np.exp(2 * math.pi * p * dual.omega1) for p in wave.lam])
            return left, eigenvalue * value, left_err + abs(eigenvalue) * err

        reports.append(_run_sample('dual_macdonald', n, params,
                                   {'lambda': wave.x.values, 'x': wave.lam.values, 's': (s,)},
                                   floor, seed, compute))
    return reports


@monitor_performance
def check_lambda_symmetry(n: int, params: ModelParams, samples: Optional[int] = None,
                          spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                          eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """Psi is symmetric in its spectral variables"""
    return _symmetry_check('lambda_symmetry', n, params, samples, spec, seed, eps,
                           lambda wave, order: wave.with_lam(wave.lam.permuted(order)))


@monitor_performance
def check_x_symmetry(n: int, params: ModelParams, samples: Optional[int] = None,
                     spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                     eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """Psi is symmetric in its coordinates"""
    return _symmetry_check('x_symmetry', n, params, samples, spec, seed, eps,
                           lambda wave, order: wave.with_x(wave.x.permuted(order)))


def _symmetry_check(relation: str, n: int, params: ModelParams, samples: Optional[int], spec: QuadratureSpec,
                    seed: int, eps: float, transform: Callable[[WaveSpec, Tuple[int, ...]], WaveSpec]):
    if n not in (2, 3):
        raise ParameterError(f"{relation} is checked for n = 2, 3 (got {n})")
    key = f'{relation}_{n}' if f'{relation}_{n}' in VerifyDefaults.FLOORS else relation
    floor = VerifyDefaults.FLOORS[key]
    work = working_spec(spec, floor, seed)
    count = samples if samples is not None else VerifyDefaults.SAMPLES.get(key, VerifyDefaults.SAMPLES[relation])
    reports = []
    for wave in _wave_samples(SampleDrawer(seed), n, params, work, eps, count):
        for order in symmetric_orders(n):
            other = transform(wave, order)
            reports.append(_compare_waves(relation, n, wave, lambda w=wave: psi(w), lambda w=other: psi(w),
                                          floor, seed, {'order': order}))
    return reports


@monitor_performance
def check_period_swap(n: int, params: ModelParams, samples: Optional[int] = None,
                      spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                      eps: float = VerifyDefaults.EPSILON) -> List[CheckReport]:
    """Psi(g | w1, w2) = Psi(g | w2, w1)"""
    floor = VerifyDefaults.FLOORS['period_swap']
    work = working_spec(spec, floor, seed)
    swapped = params.swapped()
    reports = []
    for wave in _wave_samples(SampleDrawer(seed), n, params, work, eps, _samples('period_swap', samples)):
        reports.append(_compare_waves('period_swap', n, wave, lambda w=wave: psi(w),
                                      lambda w=wave: psi(w.with_params(swapped)), floor, seed))
    return reports


# ---------------------------------------------------------------------------
# Pure algebra
# ---------------------------------------------------------------------------

def _separated(points: Sequence[complex], minimum: float) -> bool:
    return all(abs(np.sin(a - b)) >= minimum for a, b in combinations(points, 2))


@monitor_performance
def check_kernel_identity(n_max: int = VerifyDefaults.KERNEL_IDENTITY_MAX_N,
                          draws: int = VerifyDefaults.KERNEL_IDENTITY_DRAWS, seed: int = 0) -> List[CheckReport]:
    """The trigonometric kernel-function identity and its degeneration, random complex arguments"""
    floor = VerifyDefaults.FLOORS['kernel_identity']
    drawer = SampleDrawer(seed)
    reports = []
    for n in range(1, n_max + 1):
        for degenerate in (False, True):
            m = n - 1 if degenerate else n
            relation = 'kernel_identity_degenerate' if degenerate else 'kernel_identity'
            for r in range(0, n + 1):
                done = 0
                while done < draws:
                    x = drawer.complex_point(n, (0.0, math.pi), 0.5)
                    y = drawer.complex_point(m, (0.0, math.pi), 0.5)
                    alpha = drawer.complex_point(1, (-1.0, 1.0), 0.5)[0]
                    if not _separated(x.values + y.values, 0.1):
                        continue
                    done += 1
                    reports.append(_run_sample(
                        relation, n, None, {'x': x.values, 'y': y.values, 'alpha': (alpha,), 'r': (r,)},
                        floor, seed, lambda x=x, y=y, alpha=alpha, r=r: (*kernel_identity_sides(x, y, alpha, r), 0.0)))
    return reports


def _fuzz_report(result: FuzzResult, seed: int, started: float) -> CheckReport:
    return CheckReport(
        relation_id=result.name, n=result.n, params=None,
        sample={'draws': (complex(result.draws),)},
        lhs=complex(result.violations), rhs=0j,
        abs_err=float(result.violations), rel_err=float(result.violations),
        tolerance=0.0, err_budget=0.0, passed=result.passed,
        runtime_ms=1000.0 * (time.perf_counter() - started), seed=seed,
        note=f"min margin {result.min_margin:.6g}",
    )


def wave_bound_report(params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0,
                      points: int = VerifyDefaults.WAVE_BOUND_POINTS,
                      eps: float = VerifyDefaults.EPSILON) -> CheckReport:
    """
    Empirical constant of the exponential bound on Psi_2 at random real points

    The constant itself is unknown: the report passes on a finite ratio and
    carries max and median in lhs / rhs.
    """
    started = time.perf_counter()
    work = working_spec(spec, VerifyDefaults.FLOORS['wave_bound'], seed)
    drawer = SampleDrawer(seed)
    lam = drawer.spectral(2)
    xs = [drawer.coordinates(2) for _ in range(points)]
    values = [psi(WaveSpec(2, lam, x, params, work, eps))[0] for x in xs]
    ratio = wave_bound_ratio(values, [[v.real for v in x] for x in xs], lam[-1], params, eps)
    finite = math.isfinite(ratio['max'])
    if not finite:
        logger.warning(f"wave_bound: non-finite ratio for lambda = {lam.values}")
    return CheckReport(
        relation_id='wave_bound', n=2, params=params, sample={'lambda': lam.values},
        lhs=complex(ratio['max']), rhs=complex(ratio['median']), abs_err=0.0, rel_err=0.0,
        tolerance=0.0, err_budget=0.0, passed=finite,
        runtime_ms=1000.0 * (time.perf_counter() - started), seed=seed,
        note=f"max {ratio['max']:.6g}, median {ratio['median']:.6g} over {ratio['samples']} points",
    )


@monitor_performance
def check_inequalities(seed: int = 0, three_point_draws: int = VerifyDefaults.THREE_POINT_DRAWS,
                       draws: int = VerifyDefaults.FUZZ_DRAWS, n_max: int = VerifyDefaults.FUZZ_MAX_N,
                       params: Optional[ModelParams] = None, spec: QuadratureSpec = DEFAULT_SPEC,
                       wave_points: int = VerifyDefaults.WAVE_BOUND_POINTS) -> List[CheckReport]:
    """
    Fuzzed inequalities behind the convergence bounds, as reports (violations against zero),
    and the empirical wave-function bound constant (skipped for wave_points = 0)
    """
    reports = []
    started = time.perf_counter()
    reports.append(_fuzz_report(fuzz_three_point(three_point_draws, seed), seed, started))
    for n in range(2, n_max + 1):
        for fuzz in (fuzz_s_bound, fuzz_s_top_bound, fuzz_t_bound):
            started = time.perf_counter()
            reports.append(_fuzz_report(fuzz(n, draws, seed + n), seed, started))

    started = time.perf_counter()
    ok = c_n_sandwich(12)
    reports.append(CheckReport(
        relation_id='c_n_sandwich', n=12, params=None, sample={}, lhs=complex(not ok), rhs=0j,
        abs_err=float(not ok), rel_err=float(not ok), tolerance=0.0, err_budget=0.0, passed=ok,
        runtime_ms=1000.0 * (time.perf_counter() - started), seed=seed))
    if wave_points > 0:
        base = params if params is not None else _params(BASE_PERIODS, 0.6)
        reports.append(wave_bound_report(base, spec, seed, wave_points))
    return reports


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyJob:
    """One independent unit of verification work"""
    name: str
    family: str
    run: Callable[[int, QuadratureSpec], List[CheckReport]]


def job_seed(name: str, seed: int) -> int:
    return zlib.crc32(f"{name}:{seed}".encode()) & 0x7fffffff


def _params(periods: Sequence[complex], g: complex) -> ModelParams:
    return ModelParams.from_values(periods[0], periods[1], g)


def grid_params(real_periods_only: bool = False) -> List[ModelParams]:
    """The default parameter grid, skipping combinations that violate the parameter invariants"""
    out = []
    for periods in VerifyDefaults.DEFAULT_PERIODS:
        for g in VerifyDefaults.DEFAULT_COUPLINGS:
            try:
                params = _params(periods, g)
            except ParameterError as exc:
                logger.debug(f"Skipping grid point {periods}, {g}: {exc}")
                continue
            if real_periods_only and not params.periods.is_real:
                continue
            out.append(params)
    return out


def plan_jobs() -> List[VerifyJob]:
    """Every suite over its share of the default parameter grid"""
    base = _params(BASE_PERIODS, 0.6)
    macdonald = _params(VerifyDefaults.MACDONALD_PERIODS, VerifyDefaults.MACDONALD_COUPLING)
    dual_macdonald = _params(VerifyDefaults.DUAL_MACDONALD_PERIODS, VerifyDefaults.DUAL_MACDONALD_COUPLING)

    jobs = []
    for i, periods in enumerate(VerifyDefaults.DEFAULT_PERIODS):
        params = _params(periods, 0.6)
        jobs.append(VerifyJob(f's2[{i}]', 's2', lambda seed, spec, p=params: check_s2_suite(p, spec, seed=seed)))
    for g in VerifyDefaults.FOURIER_COUPLINGS:
        params = _params(BASE_PERIODS, g)
        jobs.append(VerifyJob(f'fourier_k[g={g}]', 'fourier_k',
                              lambda seed, spec, p=params: check_fourier_k(p, spec=spec, seed=seed)))
    for i, params in enumerate(grid_params(real_periods_only=True)):
        jobs.append(VerifyJob(f'asymptotics[{i}]', 'asymptotics',
                              lambda seed, spec, p=params: check_asymptotics(p, spec, seed)))
    for n in (1, 2):
        jobs.append(VerifyJob(f'qq_commutativity[n={n}]', 'qq_commutativity',
                              lambda seed, spec, n=n: check_qq_commutativity(n, base, spec=spec, seed=seed)))
        jobs.append(VerifyJob(f'q_eigen[n={n}]', 'q_eigen',
                              lambda seed, spec, n=n: check_q_eigen(n, base, spec=spec, seed=seed)))
        jobs.append(VerifyJob(f'dual_q_eigen[n={n}]', 'dual_q_eigen',
                              lambda seed, spec, n=n: check_dual_q_eigen(n, base, spec=spec, seed=seed)))
        jobs.append(VerifyJob(f'macdonald[n={n},r=1]', 'macdonald',
                              lambda seed, spec, n=n: check_macdonald(n, 1, macdonald, spec=spec, seed=seed)))
        jobs.append(VerifyJob(f'dual_macdonald[n={n},s=1]', 'dual_macdonald',
                              lambda seed, spec, n=n: check_dual_macdonald(n, 1, dual_macdonald, spec=spec, seed=seed)))
    jobs.append(VerifyJob('macdonald[n=2,r=2]', 'macdonald',
                          lambda seed, spec: check_macdonald(2, 2, macdonald, spec=spec, seed=seed)))
    jobs.append(VerifyJob('dual_macdonald[n=2,s=2]', 'dual_macdonald',
                          lambda seed, spec: check_dual_macdonald(2, 2, dual_macdonald, spec=spec, seed=seed)))
    jobs.append(VerifyJob('ql_exchange[n=2]', 'ql_exchange',
                          lambda seed, spec: check_ql_exchange(base, spec=spec, seed=seed)))
    for g in (0.6, 0.5 + 0.1j):
        params = _params(BASE_PERIODS, g)
        jobs.append(VerifyJob(f'duality[n=2,g={g}]', 'duality',
                              lambda seed, spec, p=params: check_duality(2, p, spec=spec, seed=seed)))
    jobs.append(VerifyJob('duality[n=3]', 'duality', lambda seed, spec: check_duality(3, base, spec=spec, seed=seed)))
    for n in (2, 3):
        jobs.append(VerifyJob(f'lambda_symmetry[n={n}]', 'lambda_symmetry',
                              lambda seed, spec, n=n: check_lambda_symmetry(n, base, spec=spec, seed=seed)))
    jobs.append(VerifyJob('x_symmetry[n=2]', 'x_symmetry', lambda seed, spec: check_x_symmetry(2, base, spec=spec, seed=seed)))
    jobs.append(VerifyJob('period_swap[n=2]', 'period_swap',
                          lambda seed, spec: check_period_swap(2, base, spec=spec, seed=seed)))
    jobs.append(VerifyJob('kernel_identity', 'kernel_identity', lambda seed, spec: check_kernel_identity(seed=seed)))
    jobs.append(VerifyJob('inequalities', 'inequalities', lambda seed, spec: check_inequalities(seed=seed, spec=spec)))
    return jobs


@dataclass
class VerifySummary:
    """Aggregated outcome of a verification run"""
    reports: List[CheckReport]
    seed: int
    job_stats: Dict[str, Dict] = field(default_factory=dict)
    resources: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def counts(self) -> Dict[str, int]:
        failed = sum(1 for r in self.reports if not r.passed)
        return {'total': len(self.reports), 'passed': len(self.reports) - failed, 'failed': failed}

    def max_errors(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for report in self.reports:
            out[report.relation_id] = max(out.get(report.relation_id, 0.0), report.rel_err)
        return out

    def to_dict(self) -> Dict:
        return {
            'seed': self.seed,
            'passed': self.passed,
            'counts': self.counts,
            'max_rel_err': self.max_errors(),
            'jobs': self.job_stats,
            'resources': self.resources,
        }


def select_jobs(jobs: Sequence[VerifyJob], checks: Optional[Sequence[str]]) -> List[VerifyJob]:
    """Jobs whose family is in the filter (all jobs when the filter is None)"""
    if checks is None:
        return list(jobs)
    unknown = sorted(set(checks) - set(CHECK_FAMILIES))
    if unknown:
        raise ParameterError(f"unknown check families {unknown}; choose from {list(CHECK_FAMILIES)}")
    wanted = set(checks)
    return [job for job in jobs if job.family in wanted]


def _run_job(job: VerifyJob, seed: int, spec: QuadratureSpec) -> List[CheckReport]:
    """Run one job; a DomainError ends the job as a single failed report"""
    started = time.perf_counter()
    with job_context(job.name), timed(f"verify.{job.name}"):
        try:
            reports = job.run(job_seed(job.name, seed), spec)
        except DomainError as exc:
            failed = _failed_report(job.family, 0, None, {}, seed, started, exc)
            failed.note = f"{job.name}: {failed.note}"
            reports = [failed]
    duration = time.perf_counter() - started
    logger.info(f"{job.name}: {sum(r.passed for r in reports)}/{len(reports)} passed in {duration:.2f}s")
    return reports


@monitor_performance
def run_all(checks: Optional[Sequence[str]] = None, seed: Optional[int] = None,
            threads: Optional[int] = None, spec: QuadratureSpec = DEFAULT_SPEC,
            jobs: Optional[Sequence[VerifyJob]] = None) -> VerifySummary:
    """
    Run the selected suites over the default grid

    Args:
        checks: check families to run (None for all, empty for none)
        seed: base seed; every job derives its own seed from it and its name
        threads: worker count (defaults to Config.THREADS)
        spec: base quadrature settings
        jobs: explicit job list replacing the default plan

    Returns:
        VerifySummary with reports sorted by relation_id (plan order within a relation)
    """
    seed = Config.DEFAULT_SEED if seed is None else seed
    threads = max(1, threads or Config.THREADS)
    selected = select_jobs(plan_jobs() if jobs is None else jobs, checks)
    perf_tracker.reset('verify.')
    logger.info(f"Running {len(selected)} verification jobs on {threads} worker(s), seed {seed}")

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_job, job, seed, spec) for job in selected]
        results = [future.result() for future in futures]

    reports = sorted((r for batch in results for r in batch), key=lambda r: r.relation_id)
    stats = {}
    for job in selected:
        key = f"verify.{job.name}"
        job_stats = perf_tracker.get_stats(key)
        if job_stats:
            stats[job.name] = job_stats[key]
    summary = VerifySummary(reports, seed, stats, resource_snapshot())
    counts = summary.counts
    logger.info(f"Verification finished: {counts['passed']}/{counts['total']} reports passed")
    for name, total in perf_tracker.slowest("verify.", limit=3):
        logger.info(f"Slowest: {name.removeprefix('verify.')} {total:.2f}s")
    return summary

