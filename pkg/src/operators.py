"""
Operators

Integral operators Q_n(lambda), Lambda_n(lambda) and their duals acting on
functions of tuples, the Macdonald difference operators, the trigonometric
kernel-function identity and the composed kernels used by the exchange
relations.

Kernels (dual kernels use the dual parameters with x and lambda swapped):

    Q(x_n, y_n; lambda)          = e^{2 pi i lambda (xbar - ybar)} K(x_n, y_n) mu(y_n)
    Lambda(x_n, y_{n-1}; lambda) = e^{2 pi i lambda (xbar - ybar)} K(x_n, y_{n-1}) mu(y_{n-1})

Integrals over tuples all have the form

    int d^m y  prod_j w(y_j)  prod_{i != j} mu(y_i - y_j)  f(y)

and go through integrate_tuple. Unless the QuadratureSpec names a strategy: adaptive
Gauss-Kronrod for m = 1, the shared lattice engine for m = 2 (pairwise mu
factors read from the lattice cache), quasi-Monte Carlo beyond.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, permutations
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.inequalities import level_rates
from src.model import (
    DEFAULT_SPEC, ComplexTuple, ModelParams, as_tuple, calibrate_bound_constants, d_n, k_hat, kfun,
    kprod, lattice_difference_matrix, mu, muprod,
)
from src.quadrature import (
    DecayProfile, LatticeAxis, QuadratureSpec, Strategy, grid_values, integrate_multi, lattice_axes,
    trapezoid_estimate,
)
from src.utils.errors import DomainError, ParameterError, SingularCoefficientError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

TWO_PI_I = 2j * math.pi
COINCIDE_FACTOR = 1e-9
SIN_FLOOR = 1e-12

Estimate = Tuple[complex, float]
GridEvaluator = Callable[[Sequence[LatticeAxis]], Tuple[np.ndarray, np.ndarray]]


class OperatorKind(str, Enum):
    Q = 'Q'
    LAMBDA = 'Lambda'
    Q_DUAL = 'Q_dual'
    LAMBDA_DUAL = 'Lambda_dual'


@dataclass(frozen=True)
class FunctionOnTuples:
    """
    A function of m variables that operators can act on

    Attributes:
        evaluator: vectorized f(y_1, ..., y_m) on broadcastable arrays
        arity: number of variables m
        osc_freqs_hint: angular frequencies of f besides its plane-wave part
        exponents: plane-wave frequency lambda_j of f in each variable,
            f ~ exp(2 pi i sum_j lambda_j y_j) * (decaying part)
        analytic_halfwidth: half-width of the strip in which f is analytic
        grid_evaluator: optional fast path returning (values, errors) on the
            tensor grid of lattice axes
        name: label used in log messages
        epsilon: splitting parameter when f is a wave function; operators then
            take their decay rate from the net decay bound
        wave_spectrum: spectral values of that wave function
    """
    evaluator: Callable[..., np.ndarray]
    arity: int
    osc_freqs_hint: Tuple[float, ...] = ()
    exponents: Tuple[complex, ...] = ()
    analytic_halfwidth: Optional[float] = None
    grid_evaluator: Optional[GridEvaluator] = None
    name: str = 'f'
    epsilon: Optional[float] = None
    wave_spectrum: Tuple[complex, ...] = ()

    def __post_init__(self):
        if self.arity < 0:
            raise ParameterError(f"arity must be non-negative (got {self.arity})")
        exponents = tuple(complex(e) for e in self.exponents) or (0j,) * self.arity
        if len(exponents) != self.arity:
            raise ParameterError(f"{self.name}: need {self.arity} exponents (got {len(exponents)})")
        object.__setattr__(self, 'exponents', exponents)

    @classmethod
    def plane_wave(cls, lam: Sequence[complex], eps: Optional[float] = None) -> 'FunctionOnTuples':
        """exp(2 pi i sum_j lambda_j y_j); eps marks it as the one-particle wave function"""
        lam = as_tuple(lam)

        def evaluator(*ys):
            phase = sum((l * y for l, y in zip(lam, ys)), 0j)
            return np.exp(TWO_PI_I * phase)

        return cls(evaluator, len(lam), exponents=tuple(lam), name='plane_wave',
                   epsilon=eps, wave_spectrum=tuple(lam) if eps is not None else ())

    @classmethod
    def constant(cls, value: complex = 1.0) -> 'FunctionOnTuples':
        return cls(lambda: complex(value), 0, name='constant')

    def __call__(self, point: Sequence[complex] = ()) -> complex:
        point = as_tuple(point)
        if len(point) != self.arity:
            raise ParameterError(f"{self.name} takes {self.arity} variables (got {len(point)})")
        value = self.evaluator(*(np.asarray(v) for v in point))
        return complex(np.asarray(value).reshape(-1)[0])


@dataclass(frozen=True)
class OperatorHandle:
    """Q_n(lambda), Lambda_n(lambda) or a dual operator with its spectral parameter"""
    kind: OperatorKind
    n: int
    spectral: complex
    params: ModelParams
    spec: QuadratureSpec = DEFAULT_SPEC

    def __post_init__(self):
        object.__setattr__(self, 'kind', OperatorKind(self.kind))
        object.__setattr__(self, 'spectral', complex(self.spectral))
        if self.n < 1:
            raise ParameterError(f"operators need n >= 1 (got {self.n})")

    @property
    def is_dual(self) -> bool:
        return self.kind in (OperatorKind.Q_DUAL, OperatorKind.LAMBDA_DUAL)

    @property
    def is_q(self) -> bool:
        return self.kind in (OperatorKind.Q, OperatorKind.Q_DUAL)

    @property
    def kernel_params(self) -> ModelParams:
        """Parameters the kernel is built from (dual parameters for dual operators)"""
        return self.params.dual() if self.is_dual else self.params

    @property
    def arity(self) -> int:
        """Number of variables of the functions this operator acts on"""
        return self.n if self.is_q else self.n - 1

    def constant(self) -> complex:
        """d_n for Q, d_{n-1} for Lambda (in the kernel parameters)"""
        return d_n(self.arity, self.kernel_params, self.spec)

    def kernel(self, x: Sequence[complex], y: Sequence[complex]) -> complex:
        builder = q_kernel if self.is_q else lambda_kernel
        return builder(x, y, self.spectral, self.kernel_params, self.spec)

    def __str__(self) -> str:
        return f"{self.kind.value}_{self.n}({self.spectral:.4g})"


def q_kernel(x: Sequence[complex], y: Sequence[complex], lam: complex, params: ModelParams,
             spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """Q(x_n, y_n; lambda) = e^{2 pi i lambda (xbar - ybar)} K(x_n, y_n) mu(y_n)"""
    x, y = as_tuple(x), as_tuple(y)
    if len(x) != len(y):
        raise ParameterError(f"Q kernel needs tuples of equal length (got {len(x)} and {len(y)})")
    return cmath.exp(TWO_PI_I * lam * (x.sum() - y.sum())) * kprod(x, y, params, spec) * muprod(y, params, spec)


def lambda_kernel(x: Sequence[complex], y: Sequence[complex], lam: complex, params: ModelParams,
                  spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """Lambda(x_n, y_{n-1}; lambda) = e^{2 pi i lambda (xbar - ybar)} K(x_n, y_{n-1}) mu(y_{n-1})"""
    x, y = as_tuple(x), as_tuple(y)
    if len(y) != len(x) - 1:
        raise ParameterError(f"Lambda kernel needs len(y) = len(x) - 1 (got {len(x)} and {len(y)})")
    return cmath.exp(TWO_PI_I * lam * (x.sum() - y.sum())) * kprod(x, y, params, spec) * muprod(y, params, spec)


def tuple_profiles(m: int, rate: float, osc_freqs: Sequence[float], center: float,
                   halfwidth: float, constant: float, label: str) -> List[DecayProfile]:
    """
    The same decay profile for each of m symmetric variables

    Raises:
        DomainError: the net rate is not positive (a spectral strip is violated)
            or the integrand has no analyticity strip around the real axis
    """
    if not rate > 0:
        raise DomainError(f"{label}: integrand does not decay (net rate {rate:.4g}); "
                          f"the spectral parameters leave the convergence strip")
    if not halfwidth > 0:
        raise DomainError(f"{label}: coordinates leave the analyticity strip (half-width {halfwidth:.4g})")
    profile = DecayProfile(rate=rate, osc_freqs=tuple(osc_freqs), center=center,
                           constant=constant, analytic_halfwidth=halfwidth)
    return [profile] * m


def kernel_strip(params: ModelParams, points: Sequence[complex], m: int) -> float:
    """
    Half-width in each integration variable where K(p - y) (and mu(y_i - y_j) for m >= 2)
    stay analytic, given the external points p
    """
    shift = max((abs(complex(p).imag) for p in points), default=0.0)
    width = 0.5 * params.g_star.real - shift
    if m >= 2:
        width = min(width, params.g.real)
    return width


def envelope_constant(params: ModelParams, k_factors: int, spec: QuadratureSpec) -> float:
    constants = calibrate_bound_constants(params, spec)
    return max(constants.c_k, 1.0) ** k_factors


def tuple_strategy(m: int, spec: QuadratureSpec) -> Strategy:
    """
    Strategy for an m-variable kernel integral

    An explicit spec strategy is used as given. Without one, m = 1 is adaptive,
    m = 2 runs on the lattice engine and m >= 3 uses quasi-Monte Carlo.

    Raises:
        StrategyError: nested_adaptive requested for m > 3
    """
    if spec.multi_dim_strategy is not None:
        return spec.strategy_for(m)
    if m == 1:
        return Strategy.NESTED_ADAPTIVE
    return Strategy.TENSOR_FIXED if m == 2 else Strategy.QUASI_MONTE_CARLO


def _mu_pairs(ys: Sequence[np.ndarray], params: ModelParams, spec: QuadratureSpec):
    out = 1.0 + 0.0j
    for i, j in permutations(range(len(ys)), 2):
        out = out * mu(ys[i] - ys[j], params, spec)
    return out


def integrate_tuple(weight: Callable[[np.ndarray], np.ndarray], m: int, profiles: Sequence[DecayProfile],
                    params: ModelParams, spec: QuadratureSpec,
                    dense: Optional[FunctionOnTuples] = None) -> Estimate:
    """
    int d^m y prod_j weight(y_j) prod_{i != j} mu(y_i - y_j) dense(y)

    Args:
        weight: vectorized per-variable factor
        m: number of variables
        profiles: decay profile per variable
        params: parameters of the mu factors
        spec: quadrature settings
        dense: optional function of all m variables

    Returns:
        (value, err_est)
    """
    if m == 0:
        return (dense() if dense is not None else 1.0 + 0.0j), 0.0
    if dense is not None and dense.arity != m:
        raise ParameterError(f"{dense.name} has arity {dense.arity}, the integral has {m} variables")

    strategy = tuple_strategy(m, spec)
    logger.debug(f"Kernel integral over {m} variables: {strategy.value}")
    if strategy is Strategy.TENSOR_FIXED and m <= 2:
        return _lattice_tuple(weight, m, profiles, params, spec, dense)

    def integrand(*ys):
        out = _mu_pairs(ys, params, spec)
        for y in ys:
            out = out * weight(y)
        if dense is not None:
            out = out * dense.evaluator(*ys)
        return out

    return integrate_multi(integrand, profiles, spec.with_overrides(multi_dim_strategy=strategy))


def _lattice_tuple(weight, m: int, profiles: Sequence[DecayProfile], params: ModelParams,
                   spec: QuadratureSpec, dense: Optional[FunctionOnTuples]) -> Estimate:
    axes = lattice_axes(profiles, spec)
    step = axes[0].step
    logger.debug(f"Lattice tuple integral: m = {m}, step {step:.4g}, sizes {[ax.size for ax in axes]}")
    vectors = [np.asarray(weight(ax.points), dtype=complex) for ax in axes]

    if m == 1:
        kernel = vectors[0]
    else:
        first, second = axes
        pair = (lattice_difference_matrix('mu', params, step, first.indices, second.indices, spec)
                * lattice_difference_matrix('mu', params, step, second.indices, first.indices, spec).T)
        kernel = vectors[0][:, None] * vectors[1][None, :] * pair

    if dense is None:
        dense_values, dense_errors = 1.0, 0.0
    elif dense.grid_evaluator is not None:
        dense_values, dense_errors = dense.grid_evaluator(axes)
    else:
        dense_values, dense_errors = grid_values(dense.evaluator, list(axes)), 0.0

    value, err = trapezoid_estimate(kernel * dense_values, axes, profiles)
    weight_sum = float(np.prod([ax.weight for ax in axes]))
    err += weight_sum * float(np.sum(np.abs(kernel) * dense_errors))
    return value, err


def spectral_budget(values: Sequence[complex], params: ModelParams) -> float:
    """Largest |Im(a - b)| over pairs of the values, in units of nu_g / 2"""
    return max((2 * abs((a - b).imag) / params.nu_g for a, b in combinations(values, 2)), default=0.0)


def wave_operand_rate(op: OperatorHandle, f: FunctionOnTuples) -> float:
    """
    Net decay rate of Q_n or Lambda_n acting on a wave function

    Every level of the 'q' or 'psi' bound must decay; the outermost rate is returned.

    Raises:
        ParameterError: the spectral budgets leave some level without decay
    """
    params = op.kernel_params
    if op.is_q:
        delta_q = max(2 * abs((op.spectral - e).imag) / params.nu_g for e in f.exponents)
        delta_l = spectral_budget(f.wave_spectrum, params)
        return level_rates(op.n, delta_q, delta_l, f.epsilon, params, 'q')[0]
    # Lambda_n integrates the n - 1 levels of Psi_n
    delta_l = spectral_budget(f.wave_spectrum + (op.spectral,), params)
    return level_rates(op.n - 1, 0.0, delta_l, f.epsilon, params, 'psi')[0]


def operator_profiles(op: OperatorHandle, f: FunctionOnTuples, x: ComplexTuple) -> List[DecayProfile]:
    """Per-variable decay profiles of the integral apply(op, f, x) runs"""
    params = op.kernel_params
    m = op.arity
    if f.epsilon is not None:
        rate = wave_operand_rate(op, f)
    else:
        # n K factors and 2(m - 1) growing mu factors per variable
        base = math.pi * params.nu_g * (op.n - 2 * (m - 1))
        growth = max(abs((op.spectral - e).imag) for e in f.exponents)
        rate = base - 2 * math.pi * growth
    freqs = [2 * math.pi * abs((op.spectral - e).real) for e in f.exponents] + list(f.osc_freqs_hint)
    center = float(np.mean([v.real for v in x]))
    halfwidth = kernel_strip(params, x, m)
    if f.analytic_halfwidth is not None:
        halfwidth = min(halfwidth, f.analytic_halfwidth)
    return tuple_profiles(m, rate, freqs, center, halfwidth,
                          envelope_constant(params, len(x), op.spec), str(op))


def apply(op: OperatorHandle, f: FunctionOnTuples, x: Sequence[complex]) -> Estimate:
    """
    Apply an integral operator to f and evaluate the result at x

    x is a coordinate tuple for Q / Lambda and a spectral tuple for the duals.

    Returns:
        (value, err_est)

    Raises:
        ParameterError: arity mismatch
        DomainError: the combined decay rate is not positive (strip violation)
    """
    x = as_tuple(x)
    if len(x) != op.n:
        raise ParameterError(f"{op} is evaluated at {op.n} points (got {len(x)})")
    if f.arity != op.arity:
        raise ParameterError(f"{op} acts on functions of {op.arity} variables ({f.name} has {f.arity})")

    params = op.kernel_params
    lam = op.spectral
    prefactor = op.constant() * cmath.exp(TWO_PI_I * lam * x.sum())
    if op.arity == 0:
        return prefactor * f(), 0.0

    points = x.values

    def weight(y):
        out = np.exp(-TWO_PI_I * lam * y)
        for p in points:
            out = out * kfun(p - y, params, op.spec)
        return out

    profiles = operator_profiles(op, f, x)
    value, err = integrate_tuple(weight, op.arity, profiles, params, op.spec, dense=f)
    return prefactor * value, abs(prefactor) * err


def elementary_symmetric(r: int, z: Sequence[complex]) -> complex:
    """e_r(z_1, ..., z_n) through e_r(z_1..z_k) = e_r(z_1..z_{k-1}) + z_k e_{r-1}(z_1..z_{k-1})"""
    z = as_tuple(z)
    if not 0 <= r <= len(z):
        raise ParameterError(f"need 0 <= r <= {len(z)} (got {r})")
    table = [1.0 + 0.0j] + [0.0j] * r
    for value in z:
        for k in range(r, 0, -1):
            table[k] += value * table[k - 1]
    return table[r]


def macdonald_coefficients(r: int, x: Sequence[complex], params: ModelParams) -> List[Tuple[Tuple[int, ...], complex]]:
    """
    Coefficients of M_r: for each r-subset I,

        prod_{i in I, j not in I} sh(pi/w2 (x_i - x_j - ig)) / sh(pi/w2 (x_i - x_j))

    Raises:
        ParameterError: r outside 1..n
        SingularCoefficientError: coinciding coordinates (vanishing sh denominator)
    """
    x = as_tuple(x)
    n = len(x)
    if not 1 <= r <= n:
        raise ParameterError(f"Macdonald operators need 1 <= r <= n = {n} (got {r})")
    w2 = params.omega2
    tol = COINCIDE_FACTOR * abs(w2)
    scale = math.pi / w2
    out = []
    for subset in combinations(range(n), r):
        coefficient = 1.0 + 0.0j
        for i in subset:
            for j in range(n):
                if j in subset:
                    continue
                diff = x[i] - x[j]
                denominator = cmath.sinh(scale * diff)
                if abs(diff) < tol or abs(denominator) < tol:
                    raise SingularCoefficientError(
                        f"coordinates {i} and {j} coincide modulo i w2 (x_i - x_j = {diff:.3g})")
                coefficient *= cmath.sinh(scale * (diff - 1j * params.g)) / denominator
        out.append((subset, coefficient))
    return out


def macdonald_shift(x: Sequence[complex], subset: Sequence[int], params: ModelParams) -> ComplexTuple:
    """x with x_i -> x_i - i w1 for i in the subset"""
    x = as_tuple(x)
    shift = -1j * params.omega1
    return ComplexTuple(tuple(v + shift if i in subset else v for i, v in enumerate(x)))


def macdonald_apply(r: int, f: Callable[[ComplexTuple], complex], x: Sequence[complex],
                    params: ModelParams) -> complex:
    """M_r f(x) = sum_I coefficient_I f(x with x_i -> x_i - i w1, i in I)"""
    total = 0.0 + 0.0j
    for subset, coefficient in macdonald_coefficients(r, x, params):
        total += coefficient * f(macdonald_shift(x, subset, params))
    return total


def dual_macdonald_apply(s: int, f: Callable[[ComplexTuple], complex], lam: Sequence[complex],
                         params: ModelParams) -> complex:
    """Dual Macdonald operator: M_s with the dual parameters acting on spectral variables"""
    return macdonald_apply(s, f, lam, params.dual())


def _sine_ratio(u: complex, alpha: complex) -> complex:
    denominator = cmath.sin(u)
    if abs(denominator) < SIN_FLOOR:
        raise SingularCoefficientError(f"sin denominator vanishes at {u:.3g}")
    return cmath.sin(u + alpha) / denominator


def _identity_side(a: ComplexTuple, b: ComplexTuple, alpha: complex, r: int, sign: int) -> complex:
    """
    sum_{|I| = r} prod_{i in I} [prod_{j not in I} sin(a_i - a_j + sign alpha)/sin(a_i - a_j)
                                 prod_c sin(sign (a_i - b_c) + alpha)/sin(sign (a_i - b_c))]
    """
    total = 0.0 + 0.0j
    if not 0 <= r <= len(a):
        return total
    for subset in combinations(range(len(a)), r):
        term = 1.0 + 0.0j
        for i in subset:
            for j in range(len(a)):
                if j not in subset:
                    term *= _sine_ratio(a[i] - a[j], sign * alpha)
            for c in b:
                u = a[i] - c if sign < 0 else c - a[i]
                term *= _sine_ratio(u, alpha)
        total += term
    return total


def kernel_identity_sides(x: Sequence[complex], y: Sequence[complex], alpha: complex,
                          r: int) -> Tuple[complex, complex]:
    """
    Both sides of the trigonometric kernel-function identity

    len(y) == len(x): the full identity with r-subsets on both sides.
    len(y) == len(x) - 1: its degeneration as y_n -> i infinity, where the
    right side collects r- and (r-1)-subsets of y.

    Raises:
        ParameterError: tuple lengths or r out of range
        SingularCoefficientError: a sine denominator vanishes
    """
    x, y = as_tuple(x), as_tuple(y)
    n = len(x)
    if not 0 <= r <= n:
        raise ParameterError(f"need 0 <= r <= {n} (got {r})")
    lhs = _identity_side(x, y, alpha, r, sign=-1)
    if len(y) == n:
        rhs = _identity_side(y, x, alpha, r, sign=+1)
    elif len(y) == n - 1:
        rhs = _identity_side(y, x, alpha, r, sign=+1) + _identity_side(y, x, alpha, r - 1, sign=+1)
    else:
        raise ParameterError(f"y must have {n} or {n - 1} components (got {len(y)})")
    return lhs, rhs


def kernel_identity_residual(x: Sequence[complex], y: Sequence[complex], alpha: complex, r: int) -> complex:
    """LHS - RHS of the kernel-function identity"""
    lhs, rhs = kernel_identity_sides(x, y, alpha, r)
    return lhs - rhs


def composed_qq_kernel(x: Sequence[complex], z: Sequence[complex], lam: complex, rho: complex,
                       params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """
    int d^n y Q(x, y; lambda) Q(y, z; rho)

    Returns:
        (value, err_est)

    Raises:
        DomainError: |Im(lambda - rho)| >= nu_g
    """
    x, z = as_tuple(x), as_tuple(z)
    n = len(x)
    if len(z) != n:
        raise ParameterError(f"x and z must have equal length (got {n} and {len(z)})")
    if not abs((lam - rho).imag) < params.nu_g:
        raise DomainError(f"|Im(lambda - rho)| = {abs((lam - rho).imag):.4g} must be below nu_g = {params.nu_g:.4g}")

    def weight(y):
        out = np.exp(TWO_PI_I * (rho - lam) * y)
        for p in x.values + z.values:
            out = out * kfun(p - y, params, spec)
        return out

    rate = 2 * math.pi * params.nu_g - 2 * math.pi * abs((lam - rho).imag)
    freq = 2 * math.pi * abs((lam - rho).real)
    center = float(np.mean([v.real for v in x.values + z.values]))
    profiles = tuple_profiles(n, rate, [freq], center, kernel_strip(params, x.values + z.values, n),
                              envelope_constant(params, 2 * n, spec), "composed QQ kernel")
    value, err = integrate_tuple(weight, n, profiles, params, spec)
    prefactor = cmath.exp(TWO_PI_I * (lam * x.sum() - rho * z.sum())) * muprod(z, params, spec)
    return prefactor * value, abs(prefactor) * err


def ql_exchange_sides(x: Sequence[complex], z: Sequence[complex], lam: complex, rho: complex,
                      params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> Tuple[Estimate, Estimate]:
    """
    Kernels of both sides of Q_n(lambda) Lambda_n(rho) = K^(lambda - rho) Lambda_n(rho) Q_{n-1}(lambda)

    Returns:
        ((lhs, err), (rhs, err)) at the point pair (x_n; z_{n-1})

    Raises:
        DomainError: |Im(lambda - rho)| >= nu_g / 2
    """
    x, z = as_tuple(x), as_tuple(z)
    n = len(x)
    if len(z) != n - 1:
        raise ParameterError(f"z must have {n - 1} components (got {len(z)})")
    gap = abs((lam - rho).imag)
    if not gap < 0.5 * params.nu_g:
        raise DomainError(f"|Im(lambda - rho)| = {gap:.4g} must be below nu_g / 2 = {0.5 * params.nu_g:.4g}")

    points = x.values + z.values
    halfwidth = kernel_strip(params, points, n)
    constant = envelope_constant(params, len(points), spec)
    center = float(np.mean([v.real for v in points]))
    freq = 2 * math.pi * abs((lam - rho).real)

    def weight_for(sign):
        def weight(y):
            out = np.exp(TWO_PI_I * sign * (rho - lam) * y)
            for p in points:
                out = out * kfun(p - y, params, spec)
            return out
        return weight

    # Q_n(lambda) Lambda_n(rho): n variables, net rate pi nu_g
    lhs_profiles = tuple_profiles(n, math.pi * params.nu_g - 2 * math.pi * gap, [freq], center,
                                  halfwidth, constant, "Q Lambda kernel")
    lhs, lhs_err = integrate_tuple(weight_for(+1), n, lhs_profiles, params, spec)
    lhs_factor = (d_n(n, params, spec) * d_n(n - 1, params, spec)
                  * cmath.exp(TWO_PI_I * (lam * x.sum() - rho * z.sum())) * muprod(z, params, spec))

    # Lambda_n(rho) Q_{n-1}(lambda): n - 1 variables, net rate 3 pi nu_g (n = 2)
    rhs_rate = math.pi * params.nu_g * ((2 * n - 1) - 2 * (n - 2)) - 2 * math.pi * gap
    rhs_profiles = tuple_profiles(n - 1, rhs_rate, [freq], center,
                                  kernel_strip(params, points, n - 1), constant, "Lambda Q kernel")
    rhs, rhs_err = integrate_tuple(weight_for(-1), n - 1, rhs_profiles, params, spec)
    rhs_factor = (k_hat(lam - rho, params, spec) * d_n(n - 1, params, spec) ** 2
                  * cmath.exp(TWO_PI_I * (rho * x.sum() - lam * z.sum())) * muprod(z, params, spec))

    return ((lhs_factor * lhs, abs(lhs_factor) * lhs_err),
            (rhs_factor * rhs, abs(rhs_factor) * rhs_err))


def q_lambda_factorization(x: Sequence[complex], y: Sequence[complex], lam: complex,
                           params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> Tuple[complex, complex]:
    """
    Both sides of Lambda(x_n, y_{n-1}; lambda) = e^{2 pi i lambda x_n} Q(x_{n-1}, y_{n-1}; lambda) prod_j K(x_n - y_j)
    """
    x, y = as_tuple(x), as_tuple(y)
    lhs = lambda_kernel(x, y, lam, params, spec)
    rhs = (cmath.exp(TWO_PI_I * lam * x[-1]) * q_kernel(x[:-1], y, lam, params, spec)
           * kprod(x[-1:], y, params, spec))
    return lhs, rhs


def fourier_k(lam: complex, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> Tuple[Estimate, complex]:
    """
    int e^{2 pi i lambda x} K(x) dx by quadrature, next to sqrt(w1 w2) S2(g) K^(lambda)

    Raises:
        DomainError: |Im lambda| >= nu_g / 2
    """
    lam = complex(lam)
    if not abs(lam.imag) < 0.5 * params.nu_g:
        raise DomainError(f"|Im lambda| = {abs(lam.imag):.4g} must be below nu_g / 2 = {0.5 * params.nu_g:.4g}")
    op = OperatorHandle(OperatorKind.Q, 1, lam, params, spec)
    # Q_1(lambda) on the constant function 1 at x = 0, divided by d_1
    value, err = apply(op, FunctionOnTuples.plane_wave((0.0,)), (0.0,))
    scale = 1.0 / op.constant()
    exact = scale * k_hat(lam, params, spec)
    return (value * scale, abs(scale) * err), exact

