"""
Wave Functions

Psi_{lambda_n}(x_n) built by the raising-operator recursion

    Psi_{lambda_1}(x_1) = exp(2 pi i lambda_1 x_1)
    Psi_{lambda_n}      = Lambda_n(lambda_n) Psi_{lambda_{n-1}}

together with the dual function (same recursion in the dual parameters with
coordinates and spectral variables exchanged) and the mixed representation

    Psi_{lambda_n}(x_n) = e^{2 pi i lambda_n x_n} Q_{n-1}(lambda_n) Q^_{n-1}(x_n) Psi_{lambda_{n-1}}(x_{n-1}).

Only n <= 3 is supported. Inner levels of the recursion are evaluated on the
lattice of the level above (psi_on_grid), so that every multi-dimensional
integral reduces to matrix products over cached K and mu lattices.
"""

import cmath
import math
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from src.inequalities import net_decay_rate
from src.model import (
    DEFAULT_SPEC, ComplexTuple, ModelParams, as_tuple, d_n, k_hat, kfun,
    lattice_difference_matrix,
)
from src.operators import (
    Estimate, FunctionOnTuples, OperatorHandle, OperatorKind, apply, envelope_constant, kernel_strip,
    spectral_budget, tuple_profiles,
)
from src.quadrature import (
    DecayProfile, LatticeAxis, QuadratureSpec, lattice_axes, lattice_axis, lattice_step, tensor_sum,
    trapezoid_estimate,
)
from src.utils.errors import DomainError, ParameterError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

TWO_PI_I = 2j * math.pi
DEFAULT_EPSILON = 0.5
MAX_N = 3


def theta(eps: float, n: int, params: ModelParams) -> float:
    """Width nu_g eps / (4 (n-1)! e) of the strip for Im(lambda_j - lambda_k)"""
    if not 0 <= eps < 1:
        raise ParameterError(f"eps must lie in [0, 1) (got {eps})")
    if n < 1:
        raise ParameterError(f"n must be positive (got {n})")
    return params.nu_g * eps / (4 * math.factorial(n - 1) * math.e)


@dataclass(frozen=True)
class WaveSpec:
    """Arguments of one wave-function evaluation, validated against the convergence strips"""
    n: int
    lam: ComplexTuple
    x: ComplexTuple
    params: ModelParams
    spec: QuadratureSpec = DEFAULT_SPEC
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, 'lam', as_tuple(self.lam))
        object.__setattr__(self, 'x', as_tuple(self.x))
        if not 1 <= self.n <= MAX_N:
            raise ParameterError(f"wave functions are available for 1 <= n <= {MAX_N} (got {self.n})")
        if len(self.lam) != self.n or len(self.x) != self.n:
            raise ParameterError(f"lambda and x must have {self.n} components "
                                 f"(got {len(self.lam)} and {len(self.x)})")
        if not 0 < self.epsilon < 1:
            raise ParameterError(f"epsilon must lie in (0, 1) (got {self.epsilon})")

        strip = 0.5 * self.params.g_star.real
        for j, v in enumerate(self.x):
            if not abs(v.imag) < strip:
                raise DomainError(f"x_{j + 1} = {v:.4g} is outside the analyticity strip |Im x| < Re g*/2 = {strip:.4g}")

        width = theta(self.epsilon, self.n, self.params)
        for j in range(self.n):
            for k in range(j + 1, self.n):
                gap = abs((self.lam[j] - self.lam[k]).imag)
                if not gap < width:
                    raise DomainError(
                        f"|Im(lambda_{j + 1} - lambda_{k + 1})| = {gap:.4g} violates the strip "
                        f"theta(eps) = {width:.4g} (eps = {self.epsilon})")

    def with_x(self, x: Sequence[complex]) -> 'WaveSpec':
        return replace(self, x=as_tuple(x))

    def with_lam(self, lam: Sequence[complex]) -> 'WaveSpec':
        return replace(self, lam=as_tuple(lam))

    def with_params(self, params: ModelParams) -> 'WaveSpec':
        return replace(self, params=params)

    def lower(self) -> 'WaveSpec':
        """The (n-1)-level arguments (lambda_{n-1}, x_{n-1})"""
        return replace(self, n=self.n - 1, lam=self.lam[:-1], x=self.x[:-1])

    def dual(self) -> 'WaveSpec':
        """Arguments of the dual function: coordinates and spectral values exchanged"""
        return WaveSpec(self.n, self.x, self.lam, self.params.dual(), self.spec, self.epsilon)


def psi_function(lam: Sequence[complex], params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC,
                 eps: float = DEFAULT_EPSILON) -> FunctionOnTuples:
    """Psi_{lambda_m} as a function of its m coordinates, with a lattice fast path"""
    lam = as_tuple(lam)
    m = len(lam)
    if m == 1:
        return FunctionOnTuples.plane_wave(lam, eps)

    def point_value(*ys):
        return psi(WaveSpec(m, lam, ComplexTuple(tuple(ys)), params, spec, eps))[0]

    freqs = tuple(2 * math.pi * abs((a - b).real) for i, a in enumerate(lam) for b in lam[i + 1:])
    return FunctionOnTuples(
        evaluator=np.vectorize(point_value, otypes=[complex]),
        arity=m,
        osc_freqs_hint=freqs,
        exponents=(lam[-1],) * m,
        analytic_halfwidth=0.5 * params.g_star.real,
        grid_evaluator=lambda axes: psi_on_grid(lam, axes, params, spec, eps),
        name=f"psi_{m}",
        epsilon=eps,
        wave_spectrum=tuple(lam),
    )


def psi(w: WaveSpec) -> Estimate:
    """
    Psi_{lambda_n}(x_n) by the raising-operator recursion

    Returns:
        (value, err_est); n = 1 is exact

    Raises:
        DomainError: strip violations (raised when the WaveSpec is built)
    """
    if w.n == 1:
        return cmath.exp(TWO_PI_I * w.lam[0] * w.x[0]), 0.0
    op = OperatorHandle(OperatorKind.LAMBDA, w.n, w.lam[-1], w.params, w.spec)
    inner = psi_function(w.lam[:-1], w.params, w.spec, w.epsilon)
    value, err = apply(op, inner, w.x)
    logger.debug(f"psi_{w.n}({w.lam.values}; {w.x.values}) = {value:.10g} +- {err:.2e}")
    return value, err


def psi_dual(w: WaveSpec) -> Estimate:
    """Dual wave function: the recursion with dual parameters, x playing the spectral role"""
    return psi(w.dual())


def hr_renormalized(w: WaveSpec) -> Estimate:
    """The renormalized function Phi_lambda(x) = Psi_{lambda / (w1 w2)}(x)"""
    scale = w.params.periods.product
    return psi(w.with_lam(tuple(v / scale for v in w.lam)))


def _inner_z_axis(axes: Sequence[LatticeAxis], rate: float, spec: QuadratureSpec) -> LatticeAxis:
    """Axis for the deepest level, on the same lattice as the given axes, covering their span"""
    step = axes[0].step
    if any(abs(ax.step - step) > 1e-15 * step for ax in axes):
        raise ParameterError("psi_on_grid needs axes on one common lattice")
    pad = int(math.ceil(DecayProfile(rate=rate).truncation_radius(spec) / step))
    lo = min(ax.lo for ax in axes) - pad
    hi = max(ax.hi for ax in axes) + pad
    return LatticeAxis(step, lo - lo % 2, hi + hi % 2)


def _z_sums(m0: np.ndarray, m1: np.ndarray, c: np.ndarray, stride: int) -> np.ndarray:
    """sum_l M0[k, l] c_l M1[k', l] over every stride-th column"""
    cols = slice(None, None, stride)
    return (m0[:, cols] * (stride * c[cols])[None, :]) @ m1[:, cols].T


def psi_on_grid(lam: Sequence[complex], axes: Sequence[LatticeAxis], params: ModelParams,
                spec: QuadratureSpec = DEFAULT_SPEC, eps: float = DEFAULT_EPSILON) -> Tuple[np.ndarray, np.ndarray]:
    """
    Psi_{lambda_m}(y) for y on the tensor grid of the axes (m <= 2)

    For m = 2 the inner integral runs over the same lattice, so every K factor
    is read from the lattice cache:

        Psi(y_k, y_k') = d_1 e^{2 pi i lambda_2 (y_k + y_k')} sum_l h K(y_k - z_l) K(y_k' - z_l) e^{2 pi i (lambda_1 - lambda_2) z_l}

    Returns:
        (values, errors) on the grid
    """
    lam = as_tuple(lam)
    m = len(lam)
    if m != len(axes):
        raise ParameterError(f"need {m} axes (got {len(axes)})")
    if m == 1:
        values = np.exp(TWO_PI_I * lam[0] * axes[0].points)
        return values, np.zeros(values.shape)
    if m != 2:
        raise ParameterError(f"psi_on_grid supports m <= 2 (got {m})")

    lam1, lam2 = lam
    rate = net_decay_rate(1, 1, 0.0, spectral_budget(lam, params), eps, params, 'psi')
    first, second = axes
    z_axis = _inner_z_axis(axes, rate, spec)
    step = first.step
    m0 = lattice_difference_matrix('k', params, step, first.indices, z_axis.indices, spec)
    m1 = lattice_difference_matrix('k', params, step, second.indices, z_axis.indices, spec)
    c = z_axis.weight * np.exp(TWO_PI_I * (lam1 - lam2) * z_axis.points)

    fine = _z_sums(m0, m1, c, 1)
    coarse = _z_sums(m0, m1, c, 2)
    tail = (np.abs(m0[:, [0]] * m1[:, [0]].T) * abs(c[0])
            + np.abs(m0[:, [-1]] * m1[:, [-1]].T) * abs(c[-1])) / (step * rate)

    scale = (d_n(1, params, spec)
             * np.exp(TWO_PI_I * lam2 * first.points)[:, None]
             * np.exp(TWO_PI_I * lam2 * second.points)[None, :])
    return scale * fine, np.abs(scale) * (np.abs(fine - coarse) + tail)


def psi_spectral_on_grid(x: Sequence[complex], axes: Sequence[LatticeAxis], params: ModelParams,
                         spec: QuadratureSpec = DEFAULT_SPEC,
                         eps: float = DEFAULT_EPSILON) -> Tuple[np.ndarray, np.ndarray]:
    """
    Psi_gamma(x_2) as a function of gamma = (gamma_1, gamma_2) on a spectral grid

        Psi_gamma(x) = d_1 e^{2 pi i gamma_2 (x_1 + x_2)} S(gamma_1 - gamma_2),
        S(delta)     = int dz K(x_1 - z) K(x_2 - z) e^{2 pi i delta z}

    S is tabulated once on the differences of the spectral lattice.
    """
    x = as_tuple(x)
    if len(x) != 2 or len(axes) != 2:
        raise ParameterError("psi_spectral_on_grid needs a 2-point x and two spectral axes")
    first, second = axes
    span = max(abs(first.points).max(), abs(second.points).max())
    z_profile = DecayProfile(
        rate=net_decay_rate(1, 1, 0.0, 0.0, eps, params, 'psi'),
        osc_freqs=(4 * math.pi * span,),
        center=float(np.mean([v.real for v in x])),
        constant=envelope_constant(params, 2, spec),
        analytic_halfwidth=kernel_strip(params, x, 1),
    )
    z_axis = lattice_axis(z_profile, lattice_step(z_profile, spec), spec)
    weights = np.ones(z_axis.size)
    for p in x:
        weights = weights * np.asarray(kfun(p - z_axis.points, params, spec), dtype=complex)

    offsets = np.arange(first.lo - second.hi, first.hi - second.lo + 1)
    deltas = first.step * offsets
    phases = np.exp(TWO_PI_I * np.outer(deltas, z_axis.points))
    fine = phases @ (z_axis.weight * weights)
    coarse = phases[:, ::2] @ (2 * z_axis.weight * weights[::2])
    edge = (abs(weights[0]) + abs(weights[-1])) / z_profile.rate

    gather = first.indices[:, None] - second.indices[None, :] - offsets[0]
    scale = d_n(1, params, spec) * np.exp(TWO_PI_I * (x[0] + x[1]) * second.points)[None, :]
    values = scale * fine[gather]
    errors = np.abs(scale) * (np.abs(fine - coarse)[gather] + edge)
    return values, errors


def psi_spectral_function(x: Sequence[complex], params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC,
                          eps: float = DEFAULT_EPSILON) -> FunctionOnTuples:
    """gamma -> Psi_gamma(x_2), the function dual operators act on"""
    x = as_tuple(x)
    if len(x) == 1:
        return FunctionOnTuples.plane_wave(x, eps)

    def point_value(*gammas):
        return psi(WaveSpec(2, ComplexTuple(tuple(gammas)), x, params, spec, eps))[0]

    return FunctionOnTuples(
        evaluator=np.vectorize(point_value, otypes=[complex]),
        arity=2,
        osc_freqs_hint=(2 * math.pi * abs((x[0] - x[1]).real),),
        exponents=(x[-1],) * 2,
        analytic_halfwidth=0.5 * params.nu_g,
        grid_evaluator=lambda axes: psi_spectral_on_grid(x, axes, params, spec, eps),
        name="psi_spectral",
        epsilon=eps,
        wave_spectrum=tuple(x),
    )


def _require_real_periods(params: ModelParams):
    if not params.periods.is_real:
        raise DomainError("the mixed representation is available for real positive periods only")


def psi_mixed(w: WaveSpec) -> Estimate:
    """
    Psi_n through one Q and one dual Q operator acting on Psi_{n-1}

    Raises:
        DomainError: complex periods
        ParameterError: n not in {2, 3}
    """
    _require_real_periods(w.params)
    if w.n == 2:
        return _mixed_two(w)
    if w.n == 3:
        return _mixed_three(w)
    raise ParameterError(f"the mixed representation needs n = 2 or 3 (got {w.n})")


def _dual_axis_profile(rate: float, freq: float, center: complex, points: Sequence[complex],
                       dual: ModelParams, m: int, spec: QuadratureSpec) -> DecayProfile:
    return tuple_profiles(1, rate, [freq], float(complex(center).real), kernel_strip(dual, points, m),
                          envelope_constant(dual, len(points), spec), "dual Q integral")[0]


def _mixed_two(w: WaveSpec) -> Estimate:
    params, spec = w.params, w.spec
    dual = params.dual()
    (lam1, lam2), (x1, x2) = w.lam, w.x

    # outer Q_1(lambda_2) over y; the dual integral turns into K(x_2 - y) e^{2 pi i lambda_1 y}
    y_profile = tuple_profiles(
        1, 2 * math.pi * params.nu_g - 2 * math.pi * abs((lam2 - lam1).imag),
        [2 * math.pi * abs((lam2 - lam1).real)], float(np.mean([x1.real, x2.real])),
        kernel_strip(params, w.x, 1), envelope_constant(params, 2, spec), "mixed Q integral")
    y_axis = lattice_axes(y_profile, spec)[0]
    reach = float(np.abs(y_axis.points - x2.real).max())
    g_profile = _dual_axis_profile(math.pi * dual.nu_g, 2 * math.pi * reach, lam1, (lam1,), dual, 1, spec)
    g_axis = lattice_axes([g_profile], spec)[0]

    def inner(g_ax: LatticeAxis) -> np.ndarray:
        gammas = g_ax.points
        weights = (g_ax.weight * np.exp(-TWO_PI_I * x2 * gammas)
                   * np.asarray(k_hat(lam1 - gammas, params, spec), dtype=complex))
        prefactor = d_n(1, dual, spec) * cmath.exp(TWO_PI_I * x2 * lam1)
        return prefactor * (np.exp(TWO_PI_I * np.outer(y_axis.points, gammas)) @ weights)

    inner_fine = inner(g_axis)
    inner_coarse = inner(g_axis.coarsened())
    outer = np.exp(-TWO_PI_I * lam2 * y_axis.points) * np.asarray(kfun(x1 - y_axis.points, params, spec), dtype=complex)
    value, err = trapezoid_estimate(outer * inner_fine, [y_axis], y_profile)
    err += y_axis.weight * float(np.sum(np.abs(outer) * np.abs(inner_fine - inner_coarse)))

    prefactor = d_n(1, params, spec) * cmath.exp(TWO_PI_I * lam2 * (x1 + x2))
    return prefactor * value, abs(prefactor) * err


def _mixed_three(w: WaveSpec) -> Estimate:
    """
    n = 3 with both operator integrals and the inner Psi_2 integral on lattices

    With Psi_gamma(y) = d_1 e^{2 pi i gamma_2 ybar} sum_l h K(y_1 - z_l) K(y_2 - z_l) e^{2 pi i (gamma_1 - gamma_2) z_l}
    the dual Q_2 integral collapses to B[l, s] = sum_{a,b} e^{2 pi i gamma_a z_l} A[a, b] e^{2 pi i gamma_b s}
    evaluated at s = y_k + y_k' - z_l, which lies on the same lattice as y and z.
    """
    params, spec, eps = w.params, w.spec, w.epsilon
    dual = params.dual()
    lam1, lam2, lam3 = w.lam
    x1, x2, x3 = w.x
    outer_points = (x1, x2)

    y_rate = net_decay_rate(2, 2, 2 * abs((lam3 - lam2).imag) / params.nu_g, spectral_budget((lam1, lam2), params),
                            eps, params, 'q')
    y_profiles = tuple_profiles(
        2, y_rate, [2 * math.pi * abs((lam3 - lam2).real), 2 * math.pi * abs((lam1 - lam2).real)],
        float(np.mean([x1.real, x2.real])), kernel_strip(params, outer_points, 2),
        envelope_constant(params, 2, spec), "mixed Q_2 integral")

    g_rate = net_decay_rate(2, 2, 0.0, 0.0, eps, dual, 'q')
    g_radius = DecayProfile(rate=g_rate).truncation_radius(spec)
    z_rate = net_decay_rate(1, 1, 0.0, 0.0, eps, params, 'psi')
    z_profile = tuple_profiles(1, z_rate, [4 * math.pi * (g_radius + abs(lam1.real) + abs(lam2.real))], 0.0,
                               0.5 * params.g_star.real, envelope_constant(params, 2, spec), "inner Psi_2 level")[0]
    y_axis, _ = lattice_axes([y_profiles[0], z_profile], spec)
    z_axis = _inner_z_axis([y_axis], z_rate, spec)
    step = y_axis.step

    reach = 2 * float(np.abs(y_axis.points).max()) + float(np.abs(z_axis.points).max())
    g_profile = _dual_axis_profile(g_rate, 2 * math.pi * reach, 0.5 * (lam1 + lam2), (lam1, lam2), dual, 2, spec)
    g_axis = lattice_axes([g_profile], spec)[0]
    logger.debug(f"Mixed n = 3 lattices: y {y_axis.size}, z {z_axis.size}, gamma {g_axis.size}")

    iy = y_axis.indices
    kernel_k = lattice_difference_matrix('k', params, step, iy, z_axis.indices, spec)

    def inner(z_ax: LatticeAxis, g_ax: LatticeAxis) -> np.ndarray:
        columns = slice(None, None, z_ax.stride)
        k_yz = kernel_k[:, columns]
        gammas = g_ax.points
        w_g = (np.exp(-TWO_PI_I * x3 * gammas)
               * np.asarray(k_hat(lam1 - gammas, params, spec), dtype=complex)
               * np.asarray(k_hat(lam2 - gammas, params, spec), dtype=complex))
        ig = g_ax.indices
        mu_hat = lattice_difference_matrix('mu', dual, g_ax.step, ig, ig, spec)
        mu_hat_pair = mu_hat * mu_hat.T
        a_matrix = g_ax.weight ** 2 * w_g[:, None] * w_g[None, :] * mu_hat_pair

        iz = z_ax.indices
        s_lo = 2 * int(iy.min()) - int(iz.max())
        s_hi = 2 * int(iy.max()) - int(iz.min())
        s_points = step * np.arange(s_lo, s_hi + 1)
        b_matrix = (np.exp(TWO_PI_I * np.outer(z_ax.points, gammas)) @ a_matrix
                    @ np.exp(TWO_PI_I * np.outer(gammas, s_points)))

        pair_index = iy[:, None] + iy[None, :]
        g_values = np.zeros((len(iy), len(iy)), dtype=complex)
        for l, z_index in enumerate(iz):
            g_values += k_yz[:, l, None] * k_yz[None, :, l] * b_matrix[l, pair_index - z_index - s_lo]
        constant = (d_n(2, dual, spec) * d_n(1, params, spec) * z_ax.weight
                    * cmath.exp(TWO_PI_I * x3 * (lam1 + lam2)))
        return constant * g_values

    g_fine = inner(z_axis, g_axis)
    g_coarse = inner(z_axis.coarsened(), g_axis.coarsened())

    v = np.exp(-TWO_PI_I * lam3 * y_axis.points)
    for p in outer_points:
        v = v * np.asarray(kfun(p - y_axis.points, params, spec), dtype=complex)
    mu_yy = lattice_difference_matrix('mu', params, step, iy, iy, spec)
    mu_pair = mu_yy * mu_yy.T

    value, err = trapezoid_estimate(v[:, None] * v[None, :] * mu_pair * g_fine, [y_axis, y_axis], y_profiles)
    err += y_axis.weight ** 2 * abs(tensor_sum([np.abs(v), np.abs(v)], {(0, 1): np.abs(mu_pair)},
                                               dense=np.abs(g_fine - g_coarse)))

    prefactor = d_n(2, params, spec) * cmath.exp(TWO_PI_I * lam3 * (x1 + x2 + x3))
    return prefactor * value, abs(prefactor) * err


def symmetric_orders(n: int) -> List[Tuple[int, ...]]:
    """Transpositions of neighbouring indices used by the symmetry checks"""
    orders = []
    for i in range(n - 1):
        order = list(range(n))
        order[i], order[i + 1] = order[i + 1], order[i]
        orders.append(tuple(order))
    return orders
