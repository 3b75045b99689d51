"""
Quadrature Engine

Integration over the real line and over R^d of exponentially decaying,
oscillatory integrands.

Three strategies are available:

- nested_adaptive: vectorized adaptive Gauss-Kronrod (7/15) per dimension,
  innermost dimension first (d <= 3)
- tensor_fixed: trapezoid rule on aligned lattices, with the error estimated by
  comparing against the lattice of doubled step
- quasi_monte_carlo: scrambled Sobol points on the truncated box

Integrands are vectorized callables: ``f(y)`` for lines and ``f(y1, ..., yd)``
with broadcastable array arguments for the multi-dimensional case.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from config import QuadratureDefaults
from src.utils.errors import DomainError, NonFiniteError, ParameterError, StrategyError, ToleranceError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

# Gauss-Kronrod 15-point abscissae and weights (QUADPACK qk15), positive half
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node rule on [-1, 1]
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_KRONROD = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5]] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps
_MAX_TAIL_EXTENSIONS = 3
_QMC_CHUNK = 8192
_TENSOR_CHUNK = 64


class Strategy(str, Enum):
    """Multi-dimensional integration strategy"""
    NESTED_ADAPTIVE = 'nested_adaptive'
    TENSOR_FIXED = 'tensor_fixed'
    QUASI_MONTE_CARLO = 'quasi_monte_carlo'


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and policies for every integrator in the package"""
    rel_tol: float = QuadratureDefaults.REL_TOL
    abs_tol: float = QuadratureDefaults.ABS_TOL
    max_subdivisions: int = QuadratureDefaults.MAX_SUBDIVISIONS
    truncation_safety: float = QuadratureDefaults.TRUNCATION_SAFETY
    osc_panel_factor: float = QuadratureDefaults.OSC_PANEL_FACTOR
    multi_dim_strategy: Optional[Strategy] = None
    qmc_samples: int = QuadratureDefaults.QMC_SAMPLES
    seed: int = 0
    singularity_radius: Optional[float] = None
    strip_margin: float = QuadratureDefaults.STRIP_MARGIN_FACTOR

    def __post_init__(self):
        errors = []
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            errors.append("tolerances must be positive")
        if self.max_subdivisions < 1:
            errors.append("max_subdivisions must be at least 1")
        if not 0 < self.truncation_safety < 1:
            errors.append("truncation_safety must lie in (0, 1)")
        if not self.osc_panel_factor > 0:
            errors.append("osc_panel_factor must be positive")
        if self.qmc_samples < 2:
            errors.append("qmc_samples must be at least 2")
        if self.singularity_radius is not None and self.singularity_radius <= 0:
            errors.append("singularity_radius must be positive")
        if not 0 < self.strip_margin < 0.5:
            errors.append("strip_margin must lie in (0, 0.5)")
        if errors:
            raise ParameterError("Invalid quadrature spec:\n" + "\n".join(errors))
        # Accept plain strings from config files; None lets each integral choose
        if self.multi_dim_strategy is not None:
            object.__setattr__(self, 'multi_dim_strategy', Strategy(self.multi_dim_strategy))

    def with_overrides(self, **changes) -> 'QuadratureSpec':
        """Copy of this spec with some fields replaced"""
        return replace(self, **changes)

    def loosened(self, abs_tol: float, rel_tol: Optional[float] = None) -> 'QuadratureSpec':
        """Copy with tolerances no tighter than the given ones"""
        return replace(
            self,
            abs_tol=max(self.abs_tol, abs_tol),
            rel_tol=max(self.rel_tol, rel_tol if rel_tol is not None else abs_tol),
        )

    def strategy_for(self, dim: int) -> Strategy:
        """
        Resolve the strategy actually used for a d-dimensional integral

        Without an explicit strategy: nested_adaptive for d <= 3, quasi_monte_carlo beyond.

        Raises:
            StrategyError: nested_adaptive requested for d > 3, or d > 6
        """
        if dim > 6:
            raise StrategyError(f"integrals of dimension {dim} > 6 are not supported")
        strategy = self.multi_dim_strategy
        if strategy is None:
            return Strategy.NESTED_ADAPTIVE if dim <= 3 else Strategy.QUASI_MONTE_CARLO
        if strategy is Strategy.NESTED_ADAPTIVE and dim > 3:
            raise StrategyError(f"nested_adaptive is limited to d <= 3 (got d = {dim})")
        if strategy is Strategy.TENSOR_FIXED and dim >= 4:
            logger.warning(f"tensor_fixed is not used for d = {dim}; falling back to quasi_monte_carlo")
            return Strategy.QUASI_MONTE_CARLO
        return strategy


@dataclass(frozen=True)
class DecayProfile:
    """
    Envelope of an integrand along one variable: |f(y)| <= C exp(-rate |y - center|)

    Attributes:
        rate: net exponential decay rate (must be positive)
        osc_freqs: angular frequencies present in the integrand
        center: point the envelope is centred on
        constant: the envelope constant C
        analytic_halfwidth: half-width of the strip around the real axis in which
            the integrand is analytic (needed by the lattice strategy)
    """
    rate: float
    osc_freqs: Tuple[float, ...] = ()
    center: float = 0.0
    constant: float = 1.0
    analytic_halfwidth: Optional[float] = None

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"decay rate must be positive for truncation (got {self.rate})")
        object.__setattr__(self, 'osc_freqs', tuple(abs(float(w)) for w in self.osc_freqs))

    @property
    def max_freq(self) -> float:
        return max(self.osc_freqs, default=0.0)

    def truncation_radius(self, spec: QuadratureSpec, abs_tol: Optional[float] = None) -> float:
        """R with C exp(-rate (1 - safety) R) < abs_tol"""
        tol = abs_tol or spec.abs_tol
        log_ratio = max(math.log(max(self.constant, 1.0) / tol), 1.0)
        return log_ratio / (self.rate * (1.0 - spec.truncation_safety))

    def tail_bound(self, radius: float) -> float:
        """Envelope mass outside [center - R, center + R]"""
        return 2.0 * self.constant * math.exp(-self.rate * radius) / self.rate


@dataclass(frozen=True)
class LatticeAxis:
    """Integer index range [lo, hi] on the lattice step * Z, read with a stride"""
    step: float
    lo: int
    hi: int
    stride: int = 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, self.stride)

    @property
    def points(self) -> np.ndarray:
        return self.step * self.indices

    @property
    def weight(self) -> float:
        return self.step * self.stride

    @property
    def size(self) -> int:
        return len(self.indices)

    def coarsened(self) -> 'LatticeAxis':
        """Every other point of this axis (lo and hi are kept even for alignment)"""
        return LatticeAxis(self.step, self.lo, self.hi, 2 * self.stride)


def _gk_rule(func: Callable, lo: np.ndarray, hi: np.ndarray):
    """Apply the 7/15 pair on each panel; returns (kronrod, error, inner_error)"""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * _NODES[None, :]
    raw = func(nodes.ravel())
    inner = None
    if isinstance(raw, tuple):
        raw, inner = raw
    vals = np.asarray(raw, dtype=complex)
    if vals.ndim == 0:
        vals = np.broadcast_to(vals, nodes.ravel().shape)
    vals = vals.reshape(vals.shape[:-1] + nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("integrand returned a non-finite value")

    kron = (vals @ _KRONROD) * half
    gauss = (vals @ _GAUSS) * half
    mean = kron / (2.0 * half)
    resasc = (np.abs(vals - mean[..., None]) @ _KRONROD) * half
    resabs = (np.abs(vals) @ _KRONROD) * half
    diff = np.abs(kron - gauss)

    err = diff.copy()
    usable = (resasc > 0) & (diff > 0)
    err[usable] = resasc[usable] * np.minimum(1.0, (200.0 * diff[usable] / resasc[usable]) ** 1.5)
    err = np.maximum(err, 50.0 * _EPS * resabs)

    if inner is None:
        inner_err = np.zeros(err.shape)
    else:
        inner = np.asarray(inner, dtype=float).reshape(err.shape[:-1] + nodes.shape)
        inner_err = (inner @ _KRONROD) * half
    return kron, err, inner_err


def _adaptive(func: Callable, edges: np.ndarray, abs_tol: float, rel_tol: float, max_sub: int):
    """
    Globally adaptive bisection over the given initial panels

    func may return a batch of integrands (leading axes); panels are shared
    across the batch and split when any member needs it.
    """
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    kron, err, inner = _gk_rule(func, lo, hi)

    while True:
        total = kron.sum(axis=-1)
        err_total = err.sum(axis=-1)
        target = np.maximum(abs_tol, rel_tol * np.abs(total))
        if np.all(err_total <= target):
            return total, err_total, inner.sum(axis=-1), len(lo)

        normalized = err / target[..., None]
        panel_err = normalized.reshape(-1, len(lo)).max(axis=0)
        split = panel_err > 1.0 / len(lo)
        if not split.any():
            split = panel_err >= panel_err.max()
        if len(lo) + int(split.sum()) > max_sub:
            raise ToleranceError(
                f"max_subdivisions ({max_sub}) exhausted; error {float(np.max(err_total)):.3e} "
                f"above target {float(np.min(target)):.3e}"
            )

        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        k2, e2, i2 = _gk_rule(func, new_lo, new_hi)

        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        kron = np.concatenate([kron[..., keep], k2], axis=-1)
        err = np.concatenate([err[..., keep], e2], axis=-1)
        inner = np.concatenate([inner[..., keep], i2], axis=-1)


def _initial_edges(profile: DecayProfile, radius: float, spec: QuadratureSpec) -> np.ndarray:
    """Panels symmetric about the centre, no wider than the oscillation allows"""
    width = 1.0
    if profile.max_freq > 0:
        width = min(width, spec.osc_panel_factor / profile.max_freq)
    if profile.analytic_halfwidth:
        width = min(width, 2.0 * profile.analytic_halfwidth)
    per_side = max(1, int(math.ceil(radius / width)))
    return profile.center + np.linspace(-radius, radius, 2 * per_side + 1)


def _boundary_tail(func: Callable, profile: DecayProfile, radius: float) -> np.ndarray:
    """Tail estimate from the integrand's size at the truncation points"""
    ends = np.array([profile.center - radius, profile.center + radius])
    raw = func(ends)
    if isinstance(raw, tuple):
        raw = raw[0]
    vals = np.abs(np.asarray(raw, dtype=complex))
    if vals.ndim == 0:
        vals = np.broadcast_to(vals, (2,))
    return vals.sum(axis=-1) / profile.rate


def _integrate_profile(func: Callable, profile: DecayProfile, spec: QuadratureSpec,
                       abs_tol: Optional[float] = None, rel_tol: Optional[float] = None):
    """Truncate, integrate adaptively and account for the tail; works on batches"""
    abs_tol = abs_tol or spec.abs_tol
    rel_tol = rel_tol or spec.rel_tol
    radius = profile.truncation_radius(spec, abs_tol)

    for attempt in range(_MAX_TAIL_EXTENSIONS + 1):
        edges = _initial_edges(profile, radius, spec)
        value, quad_err, inner_err, panels = _adaptive(func, edges, abs_tol, rel_tol, spec.max_subdivisions)
        tail = np.maximum(_boundary_tail(func, profile, radius), profile.tail_bound(radius))
        target = np.maximum(abs_tol, rel_tol * np.abs(value))
        if np.all(tail <= target) or attempt == _MAX_TAIL_EXTENSIONS:
            break
        radius *= 1.5
        logger.debug(f"Extending truncation radius to {radius:.3g} (tail {float(np.max(tail)):.2e})")

    logger.debug(f"Line integral on radius {radius:.3g} with {panels} panels")
    return value, quad_err + tail + inner_err


def integrate_line(f: Callable, profile: DecayProfile, spec: QuadratureSpec) -> Tuple[complex, float]:
    """
    Integrate a vectorized function over the real line

    Args:
        f: callable mapping a real ndarray to complex values of the same shape
        profile: decay envelope of f
        spec: quadrature settings

    Returns:
        (value, err_est) where err_est covers quadrature and truncation error

    Raises:
        ToleranceError: max_subdivisions exhausted
        NonFiniteError: f produced NaN or infinity
    """
    value, err = _integrate_profile(f, profile, spec)
    return complex(value), float(err)


def integrate_multi(
    f: Callable,
    profiles: Sequence[DecayProfile],
    spec: QuadratureSpec,
    on_grid: Optional[Callable[[List[LatticeAxis]], np.ndarray]] = None,
) -> Tuple[complex, float]:
    """
    Integrate over R^d, d = len(profiles)

    Args:
        f: callable f(y1, ..., yd) on broadcastable arrays (f() when d = 0)
        profiles: one decay profile per dimension
        spec: quadrature settings; its strategy is resolved per dimension
        on_grid: optional fast path for the lattice strategy returning the
            integrand on the full tensor grid of the given axes

    Returns:
        (value, err_est)
    """
    dim = len(profiles)
    if dim == 0:
        return complex(f()), 0.0

    strategy = spec.strategy_for(dim)
    logger.debug(f"integrate_multi: d = {dim}, strategy = {strategy.value}")

    if strategy is Strategy.NESTED_ADAPTIVE:
        value, err = _nested(f, list(profiles), spec, spec.abs_tol)
    elif strategy is Strategy.TENSOR_FIXED:
        value, err = _tensor(f, list(profiles), spec, on_grid)
    else:
        value, err = _quasi_monte_carlo(f, list(profiles), spec)
    return complex(value), float(err)


def _nested(f: Callable, profiles: List[DecayProfile], spec: QuadratureSpec, abs_tol: float):
    """Innermost (last) variable first; the two innermost levels are batched"""
    dim = len(profiles)
    outer = profiles[0]
    inner_tol = abs_tol / (2.0 * outer.truncation_radius(spec, abs_tol) + 1.0)

    if dim == 1:
        return _integrate_profile(lambda y: np.broadcast_to(f(y), y.shape), outer, spec, abs_tol)

    if dim == 2:
        def outer_integrand(y1):
            def inner_integrand(y2):
                return np.broadcast_to(f(y1[:, None], y2[None, :]), (len(y1), len(y2)))
            return _integrate_profile(inner_integrand, profiles[1], spec, inner_tol)
        return _integrate_profile(outer_integrand, outer, spec, abs_tol)

    def outer_integrand(y1):
        values = np.empty(len(y1), dtype=complex)
        errors = np.empty(len(y1))
        for i, v in enumerate(y1):
            values[i], errors[i] = _nested(
                lambda *rest, v=v: f(v, *rest), profiles[1:], spec, inner_tol)
        return values, errors
    return _integrate_profile(outer_integrand, outer, spec, abs_tol)


def lattice_step(profile: DecayProfile, spec: QuadratureSpec, abs_tol: Optional[float] = None) -> float:
    """
    Trapezoid step such that the doubled-step rule already meets the tolerance

    The trapezoid error for an integrand analytic in |Im y| < a with angular
    frequency w behaves like exp(-2 pi a / h + a w).
    """
    if not profile.analytic_halfwidth or profile.analytic_halfwidth <= 0:
        raise ParameterError("lattice strategy needs a positive analytic_halfwidth")
    tol = abs_tol or spec.abs_tol
    a = QuadratureDefaults.LATTICE_SHRINK * profile.analytic_halfwidth
    return math.pi * a / (math.log(max(profile.constant, 1.0) / tol) + a * profile.max_freq)


def lattice_axis(profile: DecayProfile, step: float, spec: QuadratureSpec,
                 abs_tol: Optional[float] = None) -> LatticeAxis:
    """Axis on step * Z covering the truncation window, with even end indices"""
    radius = profile.truncation_radius(spec, abs_tol)
    lo = int(math.floor((profile.center - radius) / step))
    hi = int(math.ceil((profile.center + radius) / step))
    lo -= lo % 2
    hi += hi % 2
    return LatticeAxis(step, lo, hi)


def lattice_axes(profiles: Sequence[DecayProfile], spec: QuadratureSpec,
                 abs_tol: Optional[float] = None) -> List[LatticeAxis]:
    """Axes sharing one common step, so index differences are lattice points"""
    step = min(lattice_step(p, spec, abs_tol) for p in profiles)
    return [lattice_axis(p, step, spec, abs_tol) for p in profiles]


def grid_values(f: Callable, axes: List[LatticeAxis]) -> np.ndarray:
    """Evaluate f on the tensor grid, chunked along the first axis"""
    grids = [ax.points for ax in axes]
    dim = len(grids)
    shape = tuple(len(g) for g in grids)
    out = np.empty(shape, dtype=complex)
    rest = [g.reshape((1,) + tuple(len(g) if j == i else 1 for j in range(1, dim)))
            for i, g in enumerate(grids[1:], start=1)]
    for start in range(0, shape[0], _TENSOR_CHUNK):
        head = grids[0][start:start + _TENSOR_CHUNK].reshape((-1,) + (1,) * (dim - 1))
        block = np.asarray(f(head, *rest), dtype=complex)
        out[start:start + len(head)] = np.broadcast_to(block, (len(head),) + shape[1:])
    return out


def trapezoid_estimate(values: np.ndarray, axes: Sequence[LatticeAxis],
                       profiles: Sequence[DecayProfile]) -> Tuple[complex, float]:
    """
    Lattice sum, doubled-step comparison and boundary tail estimate

    Args:
        values: integrand on the full tensor grid of the axes
        axes: lattice axes (stride 1)
        profiles: decay profiles matching the axes

    Returns:
        (value, err_est)
    """
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("integrand returned a non-finite value on the lattice")
    weight = float(np.prod([ax.weight for ax in axes]))
    fine = weight * values.sum()
    coarse_slice = tuple(slice(None, None, 2) for _ in axes)
    coarse = weight * 2 ** len(axes) * values[coarse_slice].sum()

    tail = 0.0
    for i, (ax, prof) in enumerate(zip(axes, profiles)):
        edge = np.abs(np.take(values, [0, -1], axis=i)).sum()
        tail += edge * weight / ax.weight / prof.rate
    return complex(fine), float(abs(fine - coarse) + tail)


def _tensor(f: Callable, profiles: List[DecayProfile], spec: QuadratureSpec, on_grid):
    axes = lattice_axes(profiles, spec)
    logger.debug(f"Lattice step {axes[0].step:.4g}, sizes {[ax.size for ax in axes]}")
    values = on_grid(axes) if on_grid is not None else grid_values(f, axes)
    return trapezoid_estimate(values, axes, profiles)


def _quasi_monte_carlo(f: Callable, profiles: List[DecayProfile], spec: QuadratureSpec):
    """Scrambled Sobol estimate with a two-level (N versus N/2) error estimate"""
    dim = len(profiles)
    radii = np.array([p.truncation_radius(spec) for p in profiles])
    centers = np.array([p.center for p in profiles])
    lower, upper = centers - radii, centers + radii

    m = max(1, int(round(math.log2(spec.qmc_samples))))
    sampler = qmc.Sobol(d=dim, scramble=True, seed=spec.seed)
    points = qmc.scale(sampler.random_base2(m), lower, upper)

    values = np.empty(len(points), dtype=complex)
    for start in range(0, len(points), _QMC_CHUNK):
        block = points[start:start + _QMC_CHUNK]
        values[start:start + len(block)] = np.broadcast_to(f(*block.T), (len(block),))
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("integrand returned a non-finite value at a QMC node")

    volume = float(np.prod(upper - lower))
    full = volume * values.mean()
    half = volume * values[:len(values) // 2].mean()
    tail = sum(p.tail_bound(r) for p, r in zip(profiles, radii))
    err = abs(full - half) + tail
    if dim >= 4:
        err = max(err, QuadratureDefaults.QMC_REL_FLOOR * abs(full))
    logger.debug(f"QMC with {len(points)} points in d = {dim}: error {err:.3e}")
    return full, err


def tensor_sum(vectors: Sequence[np.ndarray], pairs: Optional[Dict[Tuple[int, int], np.ndarray]] = None,
               dense: Optional[np.ndarray] = None) -> complex:
    """
    Sum over a product lattice of per-axis vectors and pairwise factors

    Computes sum_k prod_i v_i[k_i] prod_(i<j) P_ij[k_i, k_j] * dense[k] for
    d = 1, 2, 3 axes. dense is only accepted for d <= 2.
    """
    pairs = pairs or {}
    dim = len(vectors)
    if dim == 1:
        terms = vectors[0] if dense is None else vectors[0] * dense
        return complex(terms.sum())
    if dim == 2:
        block = vectors[0][:, None] * vectors[1][None, :]
        if (0, 1) in pairs:
            block = block * pairs[(0, 1)]
        if dense is not None:
            block = block * dense
        return complex(block.sum())
    if dim == 3:
        if dense is not None:
            raise ValueError("dense factors are supported for d <= 2 only")
        v0, v1, v2 = vectors
        first = v0[:, None] * v1[None, :]
        if (0, 1) in pairs:
            first = first * pairs[(0, 1)]
        second = v2[None, :] * pairs.get((0, 2), np.ones((len(v0), len(v2))))
        coupling = pairs.get((1, 2), np.ones((len(v1), len(v2))))
        return complex((first * (second @ coupling.T)).sum())
    raise ValueError(f"tensor_sum supports 1 to 3 axes (got {dim})")
