"""
Evaluation Service

Point evaluations and one-dimensional sweeps of the model functions, shared
by the eval and sweep commands.
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np

from src.model import ModelParams, k_hat, kfun, mu
from src.quadrature import QuadratureSpec
from src.special_functions import s2
from src.utils.errors import ParameterError
from src.utils.logging import setup_logger
from src.utils.monitoring import timed
from src.wavefunction import DEFAULT_EPSILON, WaveSpec, psi, psi_dual

logger = setup_logger(__name__)

TARGETS = ('s2', 'mu', 'k', 'khat', 'psi', 'psi_dual')
SWEEP_AXES = ('x', 'lambda', 'g')


@dataclass(frozen=True)
class EvalRequest:
    """Arguments of one evaluation; unused fields are ignored by the target"""
    target: str
    params: ModelParams
    spec: QuadratureSpec
    z: complex = 0j
    x: Tuple[complex, ...] = ()
    lam: Tuple[complex, ...] = ()
    n: int = 1
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ParameterError(f"unknown target {self.target!r}; choose from {TARGETS}")

    def first(self, values: Tuple[complex, ...], label: str) -> complex:
        if not values:
            raise ParameterError(f"target {self.target} needs --{label}")
        return values[0]

    def wave(self) -> WaveSpec:
        return WaveSpec(self.n, self.lam, self.x, self.params, self.spec, self.epsilon)

    def to_dict(self) -> Dict:
        return {
            'target': self.target,
            'params': self.params.to_dict(),
            'z': [self.z.real, self.z.imag],
            'x': [[v.real, v.imag] for v in self.x],
            'lambda': [[v.real, v.imag] for v in self.lam],
            'n': self.n,
            'epsilon': self.epsilon,
        }


def evaluate(request: EvalRequest) -> Tuple[complex, float]:
    """
    Evaluate the requested function

    Returns:
        (value, err_est); err_est is 0 for closed-form values

    Raises:
        DomainError: arguments outside the domain of the target
        ToleranceError: the requested accuracy could not be reached
    """
    target, params, spec = request.target, request.params, request.spec
    with timed(f"eval.{target}"):
        if target == 's2':
            result = complex(s2(request.z, params.periods, spec)), 0.0
        elif target == 'mu':
            result = complex(mu(request.first(request.x, 'x'), params, spec)), 0.0
        elif target == 'k':
            result = complex(kfun(request.first(request.x, 'x'), params, spec)), 0.0
        elif target == 'khat':
            result = complex(k_hat(request.first(request.lam, 'lambda'), params, spec)), 0.0
        elif target == 'psi':
            result = psi(request.wave())
        else:
            result = psi_dual(request.wave())
    return result


def _replace_last(values: Tuple[complex, ...], new: complex, label: str) -> Tuple[complex, ...]:
    if not values:
        raise ParameterError(f"sweeping {label} needs a starting --{label}")
    return tuple(values[:-1]) + (new,)


def sweep(request: EvalRequest, axis: str, start: float, stop: float, steps: int) -> List[Dict]:
    """
    Evaluate along one real axis: the last x or lambda component, or the coupling g

    Returns:
        rows with axis_value, re, im, err_est

    Raises:
        ParameterError: unknown axis or fewer than one step
    """
    if axis not in SWEEP_AXES:
        raise ParameterError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if steps < 1:
        raise ParameterError(f"a sweep needs at least one step (got {steps})")

    rows = []
    for value in np.linspace(start, stop, steps):
        value = float(value)
        if axis == 'g':
            periods = request.params.periods
            point = replace(request, params=ModelParams(periods, complex(value)))
        elif axis == 'x' and request.target == 's2':
            point = replace(request, z=complex(value))
        elif axis == 'x':
            point = replace(request, x=_replace_last(request.x, value, 'x'))
        else:
            point = replace(request, lam=_replace_last(request.lam, value, 'lambda'))
        result, err = evaluate(point)
        rows.append({'axis_value': value, 're': result.real, 'im': result.imag, 'err_est': err})
    logger.info(f"Swept {request.target} over {axis} in [{start}, {stop}] with {steps} steps")
    return rows

