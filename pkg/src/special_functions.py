"""
Double Sine Function

Evaluates S2(z | w1, w2) anywhere in the complex plane away from its poles.

Inside the fundamental strip 0 < Re z < Re(w1 + w2) the logarithm is given by

    ln S2(z) = int_0^inf dt/(2t) [ sh((2z - w) t) / (sh(w1 t) sh(w2 t)) - (2z - w)/(w1 w2 t) ]

with w = w1 + w2. Other points are brought into the strip with the shift relations

    S2(z) / S2(z + w1) = 2 sin(pi z / w2),    S2(z) / S2(z + w2) = 2 sin(pi z / w1)

S2 has zeros at -m w1 - k w2 (m, k >= 0) and poles at m w1 + k w2 (m, k >= 1).
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np

from config import QuadratureDefaults
from src.quadrature import QuadratureSpec
from src.utils.errors import DomainError, NearPoleError, ParameterError, ToleranceError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

ArrayLike = Union[complex, np.ndarray]

_CHUNK = 64
_CHUNK_ELEMENTS = 2_000_000
_SMALL_U = 0.5  # series switch-over for sh(u) - u
_SMALL_WT = 0.01  # series switch-over for the period factor


@dataclass(frozen=True)
class Periods:
    """The pair of quasi-periods (w1, w2), both with positive real part"""
    omega1: complex
    omega2: complex

    def __post_init__(self):
        object.__setattr__(self, 'omega1', complex(self.omega1))
        object.__setattr__(self, 'omega2', complex(self.omega2))
        if not (self.omega1.real > 0 and self.omega2.real > 0):
            raise ParameterError(f"periods need positive real parts (got {self.omega1}, {self.omega2})")

    @property
    def total(self) -> complex:
        """w1 + w2"""
        return self.omega1 + self.omega2

    @property
    def product(self) -> complex:
        return self.omega1 * self.omega2

    @property
    def sigma1(self) -> float:
        return cmath.phase(self.omega1)

    @property
    def sigma2(self) -> float:
        return cmath.phase(self.omega2)

    @property
    def is_real(self) -> bool:
        return self.omega1.imag == 0 and self.omega2.imag == 0

    def swapped(self) -> 'Periods':
        return Periods(self.omega2, self.omega1)

    def scaled(self, gamma: float) -> 'Periods':
        return Periods(gamma * self.omega1, gamma * self.omega2)

    def default_radius(self) -> float:
        return QuadratureDefaults.SINGULARITY_RADIUS_FACTOR * abs(self.total)


@dataclass(frozen=True)
class SingularityInfo:
    """Position of a point relative to the zero and pole lattices of S2"""
    is_zero: bool
    is_pole: bool
    lattice_indices: Tuple[int, int]
    distance: float


def _nearest_cone_point(u: complex, periods: Periods) -> Tuple[int, int, float]:
    """Nearest point m w1 + k w2 (m, k >= 0) to u"""
    w1, w2 = periods.omega1, periods.omega2
    m_max = int(2.0 * abs(u) / w1.real) + 2
    m = np.arange(0, m_max + 1)
    rest = u - m * w1
    k_star = (rest * np.conj(w2)).real / abs(w2) ** 2
    best = (0, 0, abs(u))
    for k in (np.floor(k_star), np.ceil(k_star)):
        k = np.maximum(k, 0).astype(int)
        dist = np.abs(rest - k * w2)
        i = int(np.argmin(dist))
        if dist[i] < best[2]:
            best = (int(m[i]), int(k[i]), float(dist[i]))
    return best


def classify_point(z: complex, periods: Periods, radius: Optional[float] = None) -> SingularityInfo:
    """
    Classify z against the zero lattice -m w1 - k w2 (m, k >= 0) and the
    pole lattice m w1 + k w2 (m, k >= 1)

    Args:
        z: point to classify
        periods: the periods
        radius: tolerance (defaults to 1e-6 |w1 + w2|)

    Returns:
        SingularityInfo for the nearest lattice point of either kind
    """
    radius = periods.default_radius() if radius is None else radius
    z = complex(z)
    zm, zk, zdist = _nearest_cone_point(-z, periods)
    pm, pk, pdist = _nearest_cone_point(z - periods.total, periods)
    if zdist <= pdist:
        return SingularityInfo(zdist <= radius, False, (zm, zk), zdist)
    return SingularityInfo(False, pdist <= radius, (pm + 1, pk + 1), pdist)


def _cone_distance(u: np.ndarray, periods: Periods) -> np.ndarray:
    """Distance from u to the closed cone spanned by w1 and w2"""
    rays = [periods.omega1 / abs(periods.omega1), periods.omega2 / abs(periods.omega2)]
    dist = np.full(u.shape, np.inf)
    for ray in rays:
        proj = np.maximum((u * np.conj(ray)).real, 0.0)
        dist = np.minimum(dist, np.abs(u - proj * ray))
    lo, hi = sorted((periods.sigma1, periods.sigma2))
    angle = np.angle(u)
    inside = (angle >= lo) & (angle <= hi)
    dist[inside] = 0.0
    return dist


def _check_periods(periods: Periods):
    if max(abs(periods.sigma1), abs(periods.sigma2)) >= QuadratureDefaults.MAX_PERIOD_ARG:
        raise DomainError(
            f"period arguments ({periods.sigma1:.3f}, {periods.sigma2:.3f}) too large for the "
            "integral representation (|arg| must stay below pi/4)"
        )


def _s2_tolerance(spec: QuadratureSpec) -> float:
    return min(spec.abs_tol, QuadratureDefaults.S2_TOL_CEILING)


@lru_cache(maxsize=64)
def _gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _series_sh_minus_u(u: np.ndarray) -> np.ndarray:
    """sh(u) - u for small |u|, by Horner in u^2 (terms to u^17)"""
    u2 = u * u
    acc = np.zeros_like(u)
    for n in range(17, 1, -2):
        acc = acc * u2 + 1.0 / math.factorial(n)
    return acc * u2 * u


def _period_factor(t: np.ndarray, w1: complex, w2: complex) -> np.ndarray:
    """t / (sh(w1 t) sh(w2 t)) - 1 / (w1 w2 t), without cancellation near t = 0"""
    prod = w1 * w2
    d2 = (w1 ** 2 + w2 ** 2) / 6.0
    d4 = (w1 ** 4 + w2 ** 4) / 120.0 + (w1 * w2) ** 2 / 36.0
    d6 = (w1 ** 6 + w2 ** 6) / 5040.0 + (w1 ** 2 * w2 ** 4 + w1 ** 4 * w2 ** 2) / 720.0

    out = np.empty(t.shape, dtype=complex)
    small = max(abs(w1), abs(w2)) * t < _SMALL_WT
    ts = t[small]
    out[small] = (-d2 * ts + (d2 ** 2 - d4) * ts ** 3 + (2 * d2 * d4 - d2 ** 3 - d6) * ts ** 5) / prod
    tl = t[~small]
    out[~small] = tl / (np.sinh(w1 * tl) * np.sinh(w2 * tl)) - 1.0 / (prod * tl)
    return out


def _strip_integrand(a: np.ndarray, t: np.ndarray, w1: complex, w2: complex,
                     period_term: np.ndarray, denom: np.ndarray) -> np.ndarray:
    """Integrand for a batch of a = 2z - w (rows) at nodes t (columns)"""
    u = a[:, None] * t[None, :]
    small = np.abs(u) < _SMALL_U
    sh_minus_u = np.sinh(u) - u
    if small.any():
        sh_minus_u[small] = _series_sh_minus_u(u[small])
    bracket = sh_minus_u / denom[None, :] + a[:, None] * period_term[None, :]
    return bracket / (2.0 * t[None, :])


def _log_s2_integral(z: np.ndarray, periods: Periods, tol: float) -> np.ndarray:
    """ln S2 from the integral representation; z must lie in the open strip"""
    w1, w2 = periods.omega1, periods.omega2
    w = periods.total
    a = 2.0 * z - w
    decay = w.real - np.abs(a.real)
    if np.any(decay <= 0):
        raise DomainError("integral representation used outside the fundamental strip")

    horizon = (math.log(1.0 / tol) + 3.0) / decay
    w_max = max(abs(w1), abs(w2))
    freq = np.maximum(np.abs(a.imag), 2.0 * max(abs(w1.imag), abs(w2.imag)))
    width = np.minimum(10.0 / np.maximum(freq, 1e-300), 3.0 / w_max)
    panels = np.ceil(horizon / width).astype(int)

    nodes_per_panel = QuadratureDefaults.S2_NODES_PER_PANEL
    if panels.max(initial=0) * nodes_per_panel > QuadratureDefaults.S2_MAX_NODES:
        raise ToleranceError(
            f"double sine integral needs {int(panels.max()) * nodes_per_panel} nodes "
            f"(cap {QuadratureDefaults.S2_MAX_NODES}); |Im z| is too large"
        )

    x_gl, w_gl = _gauss_legendre(nodes_per_panel)
    out = np.empty(z.shape, dtype=complex)
    order = np.argsort(panels, kind='stable')
    start = 0
    while start < len(order):
        rows = _CHUNK
        while rows > 1 and rows * int(panels[order[min(start + rows, len(order)) - 1]]) \
                * nodes_per_panel > _CHUNK_ELEMENTS:
            rows //= 2
        idx = order[start:start + rows]
        start += rows
        top = float(horizon[idx].max())
        count = int(panels[idx].max())
        edges = np.linspace(0.0, top, count + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * x_gl[None, :]).ravel()
        weights = (half[:, None] * w_gl[None, :]).ravel()

        period_term = _period_factor(t, w1, w2)
        denom = np.sinh(w1 * t) * np.sinh(w2 * t)
        values = _strip_integrand(a[idx], t, w1, w2, period_term, denom)
        # Analytic remainder of the non-decaying -a / (2 w1 w2 t^2) term beyond the horizon
        out[idx] = values @ weights - a[idx] / (2.0 * periods.product * top)
    return out


def log_s2_strip(z: complex, periods: Periods, spec: QuadratureSpec) -> complex:
    """
    ln S2(z) from the integral representation, for z inside the strip

    Args:
        z: point with margin < Re z < Re(w1 + w2) - margin
        periods: the periods
        spec: quadrature settings (abs_tol, strip_margin)

    Returns:
        ln S2(z)

    Raises:
        DomainError: z outside the strip (with margin) or period arguments too large
        ToleranceError: the oscillation in t needs more nodes than allowed
    """
    _check_periods(periods)
    z = complex(z)
    margin = spec.strip_margin * periods.total.real
    if not margin < z.real < periods.total.real - margin:
        raise DomainError(
            f"Re z = {z.real:.6g} outside the strip ({margin:.6g}, {periods.total.real - margin:.6g})"
        )
    return complex(_log_s2_integral(np.array([z]), periods, _s2_tolerance(spec))[0])


def _log_two_sine(v: np.ndarray) -> np.ndarray:
    """ln(2 sin v) without overflow for large |Im v|"""
    out = np.empty(v.shape, dtype=complex)
    upper = v.imag >= 20.0
    lower = v.imag <= -20.0
    middle = ~(upper | lower)
    out[middle] = np.log(2.0 * np.sin(v[middle]))
    vu = v[upper]
    out[upper] = 0.5j * math.pi - 1j * vu - np.exp(2j * vu)
    vl = v[lower]
    out[lower] = -0.5j * math.pi + 1j * vl - np.exp(-2j * vl)
    return out


def log_s2(z: ArrayLike, periods: Periods, spec: QuadratureSpec) -> ArrayLike:
    """
    ln S2 anywhere off the pole lattice (vectorized)

    Points are moved into the central band of the strip by shifts of the period
    with the smaller real part, accumulating the logarithms of the sine factors.
    Zeros of S2 give -inf.

    Raises:
        NearPoleError: a point lies within the singularity radius of a pole
    """
    _check_periods(periods)
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    radius = spec.singularity_radius or periods.default_radius()
    out = np.empty(zs.shape, dtype=complex)

    suspect = (_cone_distance(-zs, periods) <= radius) | \
              (_cone_distance(zs - periods.total, periods) <= radius)
    singular = np.zeros(zs.shape, dtype=bool)
    for i in np.flatnonzero(suspect):
        info = classify_point(zs[i], periods, radius)
        if info.is_pole:
            raise NearPoleError(
                f"z = {zs[i]:.6g} is within {radius:.1e} of the pole at lattice indices "
                f"{info.lattice_indices}", info=info
            )
        if info.is_zero:
            out[i] = -np.inf
            singular[i] = True

    regular = ~singular
    if regular.any():
        out[regular] = _ladder(zs[regular], periods, spec)

    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


def _ladder(z: np.ndarray, periods: Periods, spec: QuadratureSpec) -> np.ndarray:
    """Shift into the band |Re z - Re w / 2| <= Re w_s / 2 and add the sine logarithms"""
    if periods.omega1.real <= periods.omega2.real:
        w_s, w_o = periods.omega1, periods.omega2
    else:
        w_s, w_o = periods.omega2, periods.omega1

    band_lo = 0.5 * periods.total.real - 0.5 * w_s.real
    shifts = np.floor((z.real - band_lo) / w_s.real).astype(int)
    shifted = z - shifts * w_s

    acc = np.zeros(z.shape, dtype=complex)
    top = int(np.abs(shifts).max(initial=0))
    if top > 10_000:
        raise ToleranceError(f"ladder of {top} shifts requested; argument too far from the strip")
    for j in range(top):
        right = shifts > j
        if right.any():
            # S2(u + w_s) = S2(u) / (2 sin(pi u / w_o))
            acc[right] -= _log_two_sine(np.pi * (shifted[right] + j * w_s) / w_o)
        left = -shifts > j
        if left.any():
            # S2(z) = 2 sin(pi z / w_o) S2(z + w_s)
            acc[left] += _log_two_sine(np.pi * (z[left] + j * w_s) / w_o)

    return _log_s2_integral(shifted, periods, _s2_tolerance(spec)) + acc


def s2(z: ArrayLike, periods: Periods, spec: QuadratureSpec) -> ArrayLike:
    """
    Double sine function S2(z | w1, w2)

    Args:
        z: point or array of points
        periods: the periods
        spec: quadrature settings

    Returns:
        S2(z); exact 0 on the zero lattice

    Raises:
        NearPoleError: z within spec.singularity_radius of the pole lattice
    """
    logs = log_s2(z, periods, spec)
    with np.errstate(over='ignore'):
        values = np.exp(logs)
    if np.ndim(values) == 0:
        return complex(values)
    return values


def hyperbolic_gamma(z: ArrayLike, periods: Periods, spec: QuadratureSpec) -> ArrayLike:
    """Hyperbolic gamma function G(z | w) = S2(iz + (w1 + w2)/2 | w)"""
    return s2(1j * np.asarray(z, dtype=complex) + 0.5 * periods.total, periods, spec)
