"""
Model Data

Parameter context (periods and coupling) of the hyperbolic model together with
the scalar building blocks: the measure mu, the kernel function K, their duals,
their products over tuples and the normalizing constants d_n.

    mu(x) = S2(ix) / S2(ix + g)
    K(x)  = 1 / (S2(ix + g*/2) S2(-ix + g*/2)),      g* = w1 + w2 - g
"""

import cmath
import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Dict, Iterable, Iterator, Sequence, Tuple, Union

import numpy as np

from src.quadrature import QuadratureSpec
from src.special_functions import Periods, log_s2, s2
from src.utils.errors import NearPoleError, ParameterError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

ArrayLike = Union[complex, np.ndarray]

DEFAULT_SPEC = QuadratureSpec()

_LATTICE_BLOCK = 256
_CALIBRATION_POINTS = 241
_CALIBRATION_SPAN = 40.0  # in units of 1 / nu_g
_CALIBRATION_MARGIN = 1.2


@dataclass(frozen=True)
class ModelParams:
    """Periods and coupling constant with all derived constants"""
    periods: Periods
    g: complex

    def __post_init__(self):
        object.__setattr__(self, 'g', complex(self.g))
        errors = []
        w_re = self.periods.omega1.real + self.periods.omega2.real
        if not 0 < self.g.real < w_re:
            errors.append(f"need 0 < Re g < Re w1 + Re w2 = {w_re:.6g} (got Re g = {self.g.real:.6g})")
        if not self.nu_g > 0:
            errors.append(f"need nu_g = Re(g / (w1 w2)) > 0 (got {self.nu_g:.6g})")
        if errors:
            raise ParameterError("Invalid model parameters:\n" + "\n".join(errors))

    @classmethod
    def from_values(cls, omega1: complex, omega2: complex, g: complex) -> 'ModelParams':
        return cls(Periods(omega1, omega2), g)

    @property
    def omega1(self) -> complex:
        return self.periods.omega1

    @property
    def omega2(self) -> complex:
        return self.periods.omega2

    @property
    def g_star(self) -> complex:
        """g* = w1 + w2 - g"""
        return self.periods.total - self.g

    @property
    def g_hat(self) -> complex:
        return self.g / self.periods.product

    @property
    def g_star_hat(self) -> complex:
        return self.g_star / self.periods.product

    @property
    def periods_hat(self) -> Periods:
        """Dual periods (1/w2, 1/w1)"""
        return Periods(1.0 / self.omega2, 1.0 / self.omega1)

    @property
    def nu_g(self) -> float:
        return (self.g / self.periods.product).real

    @property
    def nu_g_star(self) -> float:
        return (self.g_star / self.periods.product).real

    def dual(self) -> 'ModelParams':
        """
        Dual parameters (g*^, w^); an involution

        Raises:
            ParameterError: nu_{g*} <= 0, so the dual parameters are invalid
        """
        if not self.nu_g_star > 0:
            raise ParameterError(f"duality needs nu_g* > 0 (got {self.nu_g_star:.6g})")
        return ModelParams(self.periods_hat, self.g_star_hat)

    def swapped(self) -> 'ModelParams':
        return ModelParams(self.periods.swapped(), self.g)

    def scaled(self, gamma: float) -> 'ModelParams':
        """Parameters after the homogeneity rescaling w -> gamma w, g -> gamma g"""
        return ModelParams(self.periods.scaled(gamma), gamma * self.g)

    def to_dict(self) -> Dict[str, list]:
        return {
            'omega1': [self.omega1.real, self.omega1.imag],
            'omega2': [self.omega2.real, self.omega2.imag],
            'g': [self.g.real, self.g.imag],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Sequence[float]]) -> 'ModelParams':
        def unpack(pair):
            return complex(pair[0], pair[1])
        return cls.from_values(unpack(data['omega1']), unpack(data['omega2']), unpack(data['g']))

    def params_hash(self) -> str:
        """Short stable identifier used in CSV summaries"""
        text = ",".join(repr(v) for pair in self.to_dict().values() for v in pair)
        return hashlib.sha1(text.encode('utf-8')).hexdigest()[:10]

    def __str__(self) -> str:
        return f"w=({self.omega1:.6g}, {self.omega2:.6g}), g={self.g:.6g}"


@dataclass(frozen=True)
class ComplexTuple:
    """Ordered tuple of complex numbers (coordinates, spectral values or integration points)"""
    values: Tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(complex(v) for v in self.values))

    @classmethod
    def of(cls, *values: complex) -> 'ComplexTuple':
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[complex]:
        return iter(self.values)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return ComplexTuple(self.values[index])
        return self.values[index]

    def sum(self) -> complex:
        """x-bar: sum of the components"""
        return complex(sum(self.values))

    def permuted(self, order: Sequence[int]) -> 'ComplexTuple':
        if sorted(order) != list(range(len(self))):
            raise ParameterError(f"{order} is not a permutation of {len(self)} indices")
        return ComplexTuple(tuple(self.values[i] for i in order))

    def concat(self, other: 'ComplexTuple') -> 'ComplexTuple':
        return ComplexTuple(self.values + tuple(other))

    def shifted(self, amount: complex) -> 'ComplexTuple':
        return ComplexTuple(tuple(v + amount for v in self.values))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def is_real(self) -> bool:
        return all(v.imag == 0 for v in self.values)


def as_tuple(values: Union['ComplexTuple', Iterable[complex]]) -> ComplexTuple:
    return values if isinstance(values, ComplexTuple) else ComplexTuple(tuple(values))


def _restore_shape(values: np.ndarray, like) -> ArrayLike:
    if np.ndim(like) == 0:
        return complex(values.ravel()[0])
    return values.reshape(np.shape(like))


def mu(x: ArrayLike, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> ArrayLike:
    """
    Measure function mu(x) = S2(ix) / S2(ix + g) (vectorized)

    Raises:
        NearPoleError: ix on the pole lattice of S2 or ix + g on its zero lattice
    """
    xs = np.atleast_1d(np.asarray(x, dtype=complex)).ravel()
    numerator = log_s2(1j * xs, params.periods, spec)
    denominator = log_s2(1j * xs + params.g, params.periods, spec)
    if np.any(np.isneginf(denominator.real)):
        bad = xs[np.isneginf(denominator.real)][0]
        raise NearPoleError(f"mu has a pole at x = {bad:.6g} (ix + g on the zero lattice)")
    with np.errstate(over='ignore'):
        return _restore_shape(np.exp(numerator - denominator), x)


def kfun(x: ArrayLike, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> ArrayLike:
    """
    Kernel function K(x) = 1 / (S2(ix + g*/2) S2(-ix + g*/2)) (vectorized, even in x)

    Raises:
        NearPoleError: one of the S2 arguments on the zero or pole lattice
    """
    xs = np.atleast_1d(np.asarray(x, dtype=complex)).ravel()
    half = 0.5 * params.g_star
    logs = log_s2(1j * xs + half, params.periods, spec) + log_s2(-1j * xs + half, params.periods, spec)
    if np.any(np.isneginf(logs.real)):
        bad = xs[np.isneginf(logs.real)][0]
        raise NearPoleError(f"K has a pole at x = {bad:.6g} (|Im x| reaches Re g*/2)")
    with np.errstate(over='ignore'):
        return _restore_shape(np.exp(-logs), x)


def mu_hat(lam: ArrayLike, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> ArrayLike:
    """Dual measure: mu evaluated with the dual parameters"""
    return mu(lam, params.dual(), spec)


def k_hat(lam: ArrayLike, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> ArrayLike:
    """Dual kernel function K^(lambda) = K_{g*^}(lambda | w^)"""
    return kfun(lam, params.dual(), spec)


def _pairwise(label: str, func, pairs: Sequence[Tuple[int, int]], diffs: np.ndarray,
              params: ModelParams, spec: QuadratureSpec) -> complex:
    if len(diffs) == 0:
        return 1.0 + 0.0j
    try:
        values = func(diffs, params, spec)
    except NearPoleError as exc:
        for (i, j), d in zip(pairs, diffs):
            try:
                func(d, params, spec)
            except NearPoleError:
                raise NearPoleError(f"{label}: {exc} at index pair {(i, j)}",
                                    info=exc.info, index_pair=(i, j)) from exc
        raise
    return complex(np.prod(values))


def kprod(x: Sequence[complex], y: Sequence[complex], params: ModelParams,
          spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """K(x_n, y_m) = prod_i prod_j K(x_i - y_j)"""
    x, y = as_tuple(x), as_tuple(y)
    pairs = [(i, j) for i in range(len(x)) for j in range(len(y))]
    diffs = np.array([x[i] - y[j] for i, j in pairs], dtype=complex)
    return _pairwise("kprod", kfun, pairs, diffs, params, spec)


def muprod(y: Sequence[complex], params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """mu(y_n) = prod_{i != j} mu(y_i - y_j)"""
    y = as_tuple(y)
    pairs = list(permutations(range(len(y)), 2))
    diffs = np.array([y[i] - y[j] for i, j in pairs], dtype=complex)
    return _pairwise("muprod", mu, pairs, diffs, params, spec)


def muprime(x: Sequence[complex], params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """mu'(x_n) = prod_{i < j} mu(x_i - x_j)"""
    x = as_tuple(x)
    pairs = list(combinations(range(len(x)), 2))
    diffs = np.array([x[i] - x[j] for i, j in pairs], dtype=complex)
    return _pairwise("muprime", mu, pairs, diffs, params, spec)


def d_n(n: int, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """
    Normalizing constant d_n(g | w) = (1/n!) [sqrt(w1 w2) S2(g | w)]^(-n)

    Raises:
        ParameterError: n < 0
        NearPoleError: g on the pole lattice
    """
    if n < 0:
        raise ParameterError(f"d_n needs n >= 0 (got {n})")
    if n == 0:
        return 1.0 + 0.0j
    base = cmath.sqrt(params.periods.product) * s2(params.g, params.periods, spec)
    return complex(base ** (-n) / math.factorial(n))


def d_n_dual(n: int, params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """d_n with the dual parameters (g*^, w^)"""
    return d_n(n, params.dual(), spec)


def decay_rates(params: ModelParams) -> Tuple[float, float]:
    """(nu_g, nu_g*): exponential rates in |mu| <= C e^(pi nu_g |x|), |K| <= C e^(-pi nu_g |x|)"""
    return params.nu_g, params.nu_g_star


def kernel_halfwidth(params: ModelParams) -> float:
    """Half-width of the strip around R where both mu and K are analytic"""
    return min(params.g.real, 0.5 * params.g_star.real)


def mu_asymptotic(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """Leading behaviour exp(pi g^ |x| +- i pi g^ g*/2) of mu for real x -> +-inf"""
    x = np.asarray(x, dtype=float)
    phase = np.sign(x) * 0.5j * math.pi * params.g_hat * params.g_star
    return np.exp(math.pi * params.g_hat * np.abs(x) + phase)


def k_asymptotic(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """Leading behaviour exp(-pi g^ |x|) of K for real x -> +-inf"""
    return np.exp(-math.pi * params.g_hat * np.abs(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class BoundConstants:
    """Empirical constants C in |mu| <= C e^(pi nu |x|) and |K| <= C e^(-pi nu |x|)"""
    c_mu: float
    c_k: float
    span: float


@lru_cache(maxsize=32)
def calibrate_bound_constants(params: ModelParams, spec: QuadratureSpec = DEFAULT_SPEC) -> BoundConstants:
    """
    Calibrate the bound constants on a coarse real grid

    The constants are 1.2 times the largest observed ratio over
    |x| <= 40 / nu_g, cached per parameter set.
    """
    span = _CALIBRATION_SPAN / params.nu_g
    grid = np.linspace(-span, span, _CALIBRATION_POINTS)
    grid = grid[grid != 0.0]
    envelope = np.exp(math.pi * params.nu_g * np.abs(grid))
    ratio_mu = np.abs(mu(grid, params, spec)) / envelope
    ratio_k = np.abs(kfun(grid, params, spec)) * envelope
    constants = BoundConstants(
        c_mu=_CALIBRATION_MARGIN * float(ratio_mu.max()),
        c_k=_CALIBRATION_MARGIN * float(ratio_k.max()),
        span=span,
    )
    logger.debug(f"Calibrated bound constants for {params}: {constants}")
    return constants


def _lattice_block(lo: int, hi: int) -> Tuple[int, int]:
    return (_LATTICE_BLOCK * math.floor(lo / _LATTICE_BLOCK),
            _LATTICE_BLOCK * math.ceil((hi + 1) / _LATTICE_BLOCK) - 1)


@lru_cache(maxsize=64)
def _lattice_values(kind: str, params: ModelParams, step: float, lo: int, hi: int,
                    spec: QuadratureSpec) -> np.ndarray:
    points = step * np.arange(lo, hi + 1)
    func = kfun if kind == 'k' else mu
    logger.debug(f"Filling {kind} lattice: step {step:.4g}, indices [{lo}, {hi}]")
    values = np.asarray(func(points, params, spec), dtype=complex)
    values.setflags(write=False)
    return values


def lattice_values(kind: str, params: ModelParams, step: float, lo: int, hi: int,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """
    K ('k') or mu ('mu') at step * k for k in [lo, hi], from a shared cache

    Index ranges are widened to whole blocks so nearby requests reuse a fill.
    """
    if kind not in ('k', 'mu'):
        raise ParameterError(f"unknown lattice kind {kind!r}")
    block_lo, block_hi = _lattice_block(lo, hi)
    values = _lattice_values(kind, params, step, block_lo, block_hi, spec)
    return values[lo - block_lo:hi - block_lo + 1]


def lattice_difference_matrix(kind: str, params: ModelParams, step: float,
                              rows: np.ndarray, cols: np.ndarray,
                              spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Matrix F(step * (rows[i] - cols[j])) for F = K or mu, gathered from the lattice cache"""
    diffs = rows[:, None] - cols[None, :]
    lo, hi = int(diffs.min()), int(diffs.max())
    values = lattice_values(kind, params, step, lo, hi, spec)
    return values[diffs - lo]
