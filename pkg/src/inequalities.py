"""
Absolute-Value Inequalities

The S_n / T_n functions of nested level tuples, the c_n recurrence, the
inequalities that bound them, seeded fuzzing of those inequalities, and the
net decay rates that the quadrature layer uses for truncation.

Level tuples are stored as arrays whose last axis is the level size, so every
function here also works on a whole batch of draws at once.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.model import ModelParams, muprime
from src.utils.errors import ParameterError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

SLACK = 1e-12

# Sampler mixture: uniform box, heavy tails, clusters around a few tie values
SAMPLER_KINDS = ('uniform', 'heavy', 'ties')


def c_n(n: int) -> int:
    """c_n = (n - 1)(c_{n-1} + 1) with c_1 = 0"""
    if n < 1:
        raise ParameterError(f"c_n needs n >= 1 (got {n})")
    value = 0
    for k in range(2, n + 1):
        value = (k - 1) * (value + 1)
    return value


@dataclass(frozen=True)
class LevelTuples:
    """
    Levels y_1, ..., y_n with dim(y_k) = k and an optional extra vector t_n

    Each level is an array whose last axis has length k; leading axes (if any)
    index independent draws.
    """
    levels: Tuple[np.ndarray, ...]
    t: Optional[np.ndarray] = None

    def __post_init__(self):
        levels = tuple(np.asarray(level, dtype=float) for level in self.levels)
        if not levels:
            raise ParameterError("at least one level is required")
        for k, level in enumerate(levels, start=1):
            if level.shape[-1] != k:
                raise ParameterError(f"level {k} must have {k} components (got {level.shape[-1]})")
            if not np.all(np.isfinite(level)):
                raise ParameterError(f"level {k} has non-finite entries")
        object.__setattr__(self, 'levels', levels)
        if self.t is not None:
            t = np.asarray(self.t, dtype=float)
            if t.shape[-1] != len(levels):
                raise ParameterError(f"t must have {len(levels)} components (got {t.shape[-1]})")
            object.__setattr__(self, 't', t)

    @classmethod
    def from_lists(cls, levels: Sequence[Sequence[float]], t: Optional[Sequence[float]] = None) -> 'LevelTuples':
        return cls(tuple(np.asarray(level, dtype=float) for level in levels),
                   None if t is None else np.asarray(t, dtype=float))

    @property
    def n(self) -> int:
        return len(self.levels)

    def norm(self, k: int) -> np.ndarray:
        """L1 norm of level k (1-based)"""
        return np.abs(self.levels[k - 1]).sum(axis=-1)

    def lower_norms(self, upto: int) -> np.ndarray:
        """Sum of the norms of levels 1..upto"""
        return sum((self.norm(k) for k in range(1, upto + 1)), np.zeros(self.levels[0].shape[:-1]))

    def permuted(self, rng: np.random.Generator) -> 'LevelTuples':
        """Random permutation inside every level (and of t)"""
        levels = tuple(level[..., rng.permutation(level.shape[-1])] for level in self.levels)
        t = None if self.t is None else self.t[..., rng.permutation(self.t.shape[-1])]
        return LevelTuples(levels, t)


def _pair_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_{i,j} |a_i - b_j| over the last axes"""
    return np.abs(a[..., :, None] - b[..., None, :]).sum(axis=(-2, -1))


def _s_value(levels: Sequence[np.ndarray]) -> np.ndarray:
    total = np.zeros(levels[0].shape[:-1])
    for k in range(2, len(levels) + 1):
        top, below = levels[k - 1], levels[k - 2]
        total = total + _pair_sum(top, top) - _pair_sum(top, below)
    return total


def s_fn(levels: LevelTuples) -> np.ndarray:
    """
    S_n(y_1, ..., y_n) = sum_{i != j} |y_i^(n) - y_j^(n)| - sum_{i,j} |y_i^(n) - y_j^(n-1)| + S_{n-1}

    with S_1 = 0. Returns a scalar array for a single draw.
    """
    return _s_value(levels.levels)


def t_fn(levels: LevelTuples) -> np.ndarray:
    """T_n = sum_{i != j} |t_i - t_j| - sum_{i,j} |t_i - y_j^(n)| + S_n"""
    if levels.t is None:
        raise ParameterError("t_fn needs the extra vector t")
    top = levels.levels[-1]
    return _pair_sum(levels.t, levels.t) - _pair_sum(levels.t, top) + s_fn(levels)


def _holds(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(lhs), np.abs(rhs)) + 1.0
    return lhs <= rhs + SLACK * scale


def three_point_margin(y1, y2, y, eps) -> np.ndarray:
    """rhs - lhs of |y1 - y2| - |y1 - y| - |y2 - y| <= eps (|y1| + |y2| - |y|)"""
    y1, y2, y, eps = (np.asarray(v, dtype=float) for v in (y1, y2, y, eps))
    lhs = np.abs(y1 - y2) - np.abs(y1 - y) - np.abs(y2 - y)
    rhs = eps * (np.abs(y1) + np.abs(y2) - np.abs(y))
    return rhs - lhs


def check_three_point(y1, y2, y, eps) -> bool:
    """
    The three-point inequality for eps in [0, 2]

    Raises:
        ParameterError: eps outside [0, 2]
    """
    eps_arr = np.asarray(eps, dtype=float)
    if np.any(eps_arr < 0) or np.any(eps_arr > 2):
        raise ParameterError(f"eps must lie in [0, 2] (got {eps})")
    y1, y2, y = (np.asarray(v, dtype=float) for v in (y1, y2, y))
    lhs = np.abs(y1 - y2) - np.abs(y1 - y) - np.abs(y2 - y)
    rhs = eps_arr * (np.abs(y1) + np.abs(y2) - np.abs(y))
    return bool(np.all(_holds(lhs, rhs)))


def _require_levels(levels: LevelTuples, label: str):
    if levels.n < 2:
        raise ParameterError(f"{label} needs n >= 2 (got n = {levels.n})")


def s_bound_sides(levels: LevelTuples, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of S_n <= 1/2 sum |y_i - y_j| + c_n eps ||y_n|| - eps sum_{k<n} ||y_k||"""
    _require_levels(levels, "check_s_bound")
    n = levels.n
    limit = 2.0 * (n - 1) / c_n(n)
    if not 0 <= eps <= limit:
        raise ParameterError(f"eps must lie in [0, 2(n-1)/c_n] = [0, {limit:.6g}] (got {eps})")
    top = levels.levels[-1]
    rhs = 0.5 * _pair_sum(top, top) + c_n(n) * eps * levels.norm(n) - eps * levels.lower_norms(n - 1)
    return s_fn(levels), rhs


def check_s_bound(levels: LevelTuples, eps: float) -> bool:
    lhs, rhs = s_bound_sides(levels, eps)
    return bool(np.all(_holds(lhs, rhs)))


def s_top_bound_sides(levels: LevelTuples, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of S_n <= (n - 1 + eps) ||y_n|| - (eps / c_n) sum_{k<n} ||y_k||"""
    _require_levels(levels, "check_s_top_bound")
    n = levels.n
    if not 0 <= eps <= 2 * (n - 1):
        raise ParameterError(f"eps must lie in [0, {2 * (n - 1)}] (got {eps})")
    rhs = (n - 1 + eps) * levels.norm(n) - eps / c_n(n) * levels.lower_norms(n - 1)
    return s_fn(levels), rhs


def check_s_top_bound(levels: LevelTuples, eps: float) -> bool:
    lhs, rhs = s_top_bound_sides(levels, eps)
    return bool(np.all(_holds(lhs, rhs)))


def tn_bound_sides(levels: LevelTuples, r: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both sides of
    T_n <= (n + r) ||t|| - (1 - r)/(2 n c_n) sum_{k<=n} ||y_k|| - r |sum_j (t_j - y_j^(n))|
    """
    _require_levels(levels, "check_t_bound")
    if levels.t is None:
        raise ParameterError("check_t_bound needs the extra vector t")
    if not 0 <= r <= 1:
        raise ParameterError(f"r must lie in [0, 1] (got {r})")
    n = levels.n
    t_norm = np.abs(levels.t).sum(axis=-1)
    shift = np.abs((levels.t - levels.levels[-1]).sum(axis=-1))
    rhs = (n + r) * t_norm - (1 - r) / (2 * n * c_n(n)) * levels.lower_norms(n) - r * shift
    return t_fn(levels), rhs


def check_t_bound(levels: LevelTuples, r: float) -> bool:
    lhs, rhs = tn_bound_sides(levels, r)
    return bool(np.all(_holds(lhs, rhs)))


def net_decay_rate(n: int, level: int, delta_Q: float, delta_L: float, eps: float,
                   params: ModelParams, integral: str = 'q') -> float:
    """
    Exponential decay rate (per unit L1 norm) of a nested integrand at one level

    Args:
        n: number of integration levels of the integral
        level: level index; n is the outermost level, 1..n-1 the inner
            ones. For integral 'j', level n is the t level and level 0 the
            direction |sum_j (t_j - y_j)|
        delta_Q: imaginary-part budget of the Q spectral parameter, in units of nu_g / 2
        delta_L: imaginary-part budget between neighbouring lambda_k, same units
        eps: splitting parameter
        params: model parameters (supplies nu_g)
        integral: 'q' for Q_n applied to the wave function, 'psi' for the
            wave function itself, 'j' for the exchanged Lambda Q integral

    Returns:
        The positive rate pi nu_g * coefficient

    Raises:
        ParameterError: the convergence conditions fail or the rate is not positive
    """
    if integral not in ('q', 'psi', 'j'):
        raise ParameterError(f"unknown integral kind {integral!r}")
    if n < 1 or not 0 <= level <= n:
        raise ParameterError(f"level {level} is outside 0..{n}")
    if level == 0 and integral != 'j':
        raise ParameterError("level 0 only exists for integral 'j'")

    factorial_e = math.factorial(max(n - 1, 0)) * math.e
    errors = []
    if integral in ('q', 'j') and not delta_Q < 1 - eps:
        errors.append(f"delta_Q = {delta_Q:.6g} must be below 1 - eps = {1 - eps:.6g}")
    if integral == 'j':
        if not delta_L < eps / (2 * factorial_e):
            errors.append(f"delta_L = {delta_L:.6g} must be below eps / (2 (n-1)! e) = {eps / (2 * factorial_e):.6g}")
    else:
        if not delta_L < eps / factorial_e:
            errors.append(f"delta_L = {delta_L:.6g} must be below eps / ((n-1)! e) = {eps / factorial_e:.6g}")
        if integral == 'psi' and not delta_L < 2 - eps:
            errors.append(f"delta_L = {delta_L:.6g} must be below 2 - eps")
    if errors:
        raise ParameterError("No positive decay rate:\n" + "\n".join(errors))

    if integral == 'q':
        coefficient = 1 - delta_Q - eps if level == n else eps / c_n(n) - delta_L
    elif integral == 'psi':
        coefficient = 2 - delta_L - eps if level == n else eps / c_n(n) - delta_L
    elif level == n:
        coefficient = eps
    elif level == 0:
        coefficient = 1 - delta_Q - eps
    else:
        coefficient = eps / (2 * (n - 1) * c_n(n - 1)) - delta_L

    if not coefficient > 0:
        raise ParameterError(f"level {level} of the {integral!r} integral has no decay (coefficient {coefficient:.6g})")
    return math.pi * params.nu_g * coefficient


def level_rates(n: int, delta_Q: float, delta_L: float, eps: float,
                params: ModelParams, integral: str = 'q') -> List[float]:
    """net_decay_rate for the levels n, n-1, ..., 1 (outermost first)"""
    return [net_decay_rate(n, level, delta_Q, delta_L, eps, params, integral)
            for level in range(n, 0, -1)]


def _draw(rng: np.random.Generator, kind: str, shape: Tuple[int, ...]) -> np.ndarray:
    if kind == 'uniform':
        return rng.uniform(-5.0, 5.0, size=shape)
    if kind == 'heavy':
        return rng.standard_cauchy(size=shape)
    # ties: a handful of shared values with tiny jitter
    centers = rng.uniform(-3.0, 3.0, size=shape[:-1] + (2,))
    pick = rng.integers(0, 2, size=shape)
    base = np.take_along_axis(centers, pick, axis=-1)
    return base + rng.normal(scale=1e-9, size=shape) * rng.integers(0, 2, size=shape)


def sample_levels(rng: np.random.Generator, n: int, draws: int, with_t: bool = False) -> LevelTuples:
    """Draw a batch of level tuples from the three-way sampler mixture"""
    kinds = rng.choice(len(SAMPLER_KINDS), size=draws)

    def mixed(width: int) -> np.ndarray:
        out = np.empty((draws, width))
        for index, kind in enumerate(SAMPLER_KINDS):
            rows = kinds == index
            out[rows] = _draw(rng, kind, (int(rows.sum()), width))
        return out

    levels = tuple(mixed(k) for k in range(1, n + 1))
    return LevelTuples(levels, mixed(n) if with_t else None)


@dataclass
class FuzzResult:
    """Outcome of fuzzing one inequality"""
    name: str
    n: int
    draws: int
    violations: int
    min_margin: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'n': self.n,
            'draws': self.draws,
            'violations': self.violations,
            'min_margin': self.min_margin,
        }


def _summarize(name: str, n: int, lhs: np.ndarray, rhs: np.ndarray) -> FuzzResult:
    ok = _holds(lhs, rhs)
    result = FuzzResult(name, n, int(ok.size), int((~ok).sum()), float(np.min(rhs - lhs)))
    if not result.passed:
        logger.warning(f"{name} (n = {n}): {result.violations} violations in {result.draws} draws")
    return result


def fuzz_three_point(draws: int, seed: int, batch: int = 200_000) -> FuzzResult:
    """Random draws of (y1, y2, y) with eps uniform in [0, 2]"""
    rng = np.random.default_rng(seed)
    violations, min_margin, done = 0, math.inf, 0
    while done < draws:
        size = min(batch, draws - done)
        kind = SAMPLER_KINDS[(done // batch) % len(SAMPLER_KINDS)]
        y1, y2, y = _draw(rng, kind, (3, size))
        eps = rng.uniform(0.0, 2.0, size=size)
        lhs = np.abs(y1 - y2) - np.abs(y1 - y) - np.abs(y2 - y)
        rhs = eps * (np.abs(y1) + np.abs(y2) - np.abs(y))
        ok = _holds(lhs, rhs)
        violations += int((~ok).sum())
        min_margin = min(min_margin, float(np.min(rhs - lhs)))
        done += size
    return FuzzResult('three_point', 1, draws, violations, min_margin)


def fuzz_s_bound(n: int, draws: int, seed: int) -> FuzzResult:
    """First S_n bound with eps at random points of [0, 2(n-1)/c_n] (the endpoints included)"""
    rng = np.random.default_rng(seed)
    levels = sample_levels(rng, n, draws)
    limit = 2.0 * (n - 1) / c_n(n)
    lhs_all, rhs_all = [], []
    for eps in (0.0, limit, float(rng.uniform(0, limit))):
        lhs, rhs = s_bound_sides(levels, eps)
        lhs_all.append(lhs)
        rhs_all.append(rhs)
    return _summarize('s_bound', n, np.concatenate(lhs_all), np.concatenate(rhs_all))


def fuzz_s_top_bound(n: int, draws: int, seed: int) -> FuzzResult:
    rng = np.random.default_rng(seed)
    levels = sample_levels(rng, n, draws)
    lhs_all, rhs_all = [], []
    for eps in (0.0, 2.0 * (n - 1), float(rng.uniform(0, 2 * (n - 1)))):
        lhs, rhs = s_top_bound_sides(levels, eps)
        lhs_all.append(lhs)
        rhs_all.append(rhs)
    return _summarize('s_top_bound', n, np.concatenate(lhs_all), np.concatenate(rhs_all))


def fuzz_t_bound(n: int, draws: int, seed: int) -> FuzzResult:
    rng = np.random.default_rng(seed)
    levels = sample_levels(rng, n, draws, with_t=True)
    lhs_all, rhs_all = [], []
    for r in (0.0, 1.0, float(rng.uniform(0, 1))):
        lhs, rhs = tn_bound_sides(levels, r)
        lhs_all.append(lhs)
        rhs_all.append(rhs)
    return _summarize('t_bound', n, np.concatenate(lhs_all), np.concatenate(rhs_all))


def c_n_sandwich(n_max: int = 12) -> bool:
    """(n-1)! <= c_n < (n-1)! e for 2 <= n <= n_max, in integer arithmetic"""
    for n in range(2, n_max + 1):
        value, lower = c_n(n), math.factorial(n - 1)
        # c_n equals the integer sum_{k=0}^{n-2} (n-1)!/k!, strictly below (n-1)! e
        partial = sum(lower // math.factorial(k) for k in range(0, n - 1))
        if not (lower <= value and value == partial):
            return False
    return True


def wave_bound_ratio(psi_values: Sequence[complex], xs: Sequence[Sequence[float]],
                     lam_n: complex, params: ModelParams, eps: float) -> Dict[str, float]:
    """
    Empirical ratio |mu'(x) Psi(x)| / exp(pi nu_g (eps ||x|| - (2/nu_g) xbar Im lambda_n))

    The constant of the exponential wave-function bound is not known, so this is
    only reported (max and median), never asserted.
    """
    if len(psi_values) != len(xs) or not psi_values:
        raise ParameterError("psi_values and xs must be non-empty and of equal length")
    ratios = []
    for value, x in zip(psi_values, xs):
        x = np.asarray(x, dtype=float)
        envelope = math.pi * params.nu_g * (eps * np.abs(x).sum() - 2.0 / params.nu_g * x.sum() * complex(lam_n).imag)
        ratios.append(abs(muprime(x, params) * value) / math.exp(envelope))
    ratios = np.asarray(ratios)
    return {'max': float(ratios.max()), 'median': float(np.median(ratios)), 'samples': len(ratios)}
