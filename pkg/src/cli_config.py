"""
Command-Line Configuration

Flat key=value configuration files, complex numbers written as "a+bi", and
the merged CliConfig the commands run with (flags override file values).
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from config import Config
from src.model import ModelParams
from src.quadrature import QuadratureSpec, Strategy
from src.utils.errors import ParameterError
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

COMMANDS = ('eval', 'verify', 'sweep', 'report')
OUTPUT_FORMATS = ('json', 'csv')

# Quadrature keys accepted in config files and their converters
QUADRATURE_KEYS = {
    'rel_tol': float,
    'abs_tol': float,
    'max_subdivisions': int,
    'truncation_safety': float,
    'osc_panel_factor': float,
    'multi_dim_strategy': Strategy,
    'qmc_samples': int,
    'strip_margin': float,
}

_COMPLEX_RE = re.compile(
    r'^\s*(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?'
    r'(?:\s*(?P<im>[+-]\s*(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)\s*[ij])?\s*$'
)


def parse_complex(text: str) -> complex:
    """
    Parse "a+bi", "a-bj", "bi", "a" or "-i"

    Raises:
        ParameterError: unparseable text
    """
    if isinstance(text, (int, float, complex)):
        return complex(text)
    cleaned = str(text).strip()
    if not cleaned:
        raise ParameterError("empty complex number")
    # a bare imaginary part such as "0.3i" or "-i"
    bare = re.fullmatch(r'([+-]?)(\d+\.?\d*|\.\d+)?(?:[eE]([+-]?\d+))?\s*[ij]', cleaned)
    if bare:
        sign, digits, exponent = bare.groups()
        magnitude = float(digits or 1.0) * (10.0 ** int(exponent) if exponent else 1.0)
        return complex(0.0, -magnitude if sign == '-' else magnitude)

    match = _COMPLEX_RE.match(cleaned)
    if not match or (match.group('re') is None and match.group('im') is None):
        raise ParameterError(f"cannot parse complex number {text!r} (expected a+bi)")
    real = float(match.group('re')) if match.group('re') else 0.0
    imag = 0.0
    if match.group('im') is not None:
        part = match.group('im').replace(' ', '')
        imag = float(part + '1') if part in ('+', '-') else float(part)
    return complex(real, imag)


def parse_complex_list(text: str) -> List[complex]:
    """Comma-separated complex numbers"""
    return [parse_complex(part) for part in str(text).split(',') if part.strip()]


def format_complex(value: complex, digits: int = 12) -> str:
    value = complex(value)
    sign = '-' if value.imag < 0 else '+'
    return f"{value.real:.{digits}g}{sign}{abs(value.imag):.{digits}g}i"


def read_config_file(path: Path) -> Dict[str, str]:
    """
    Read flat key=value lines; '#' starts a comment

    Raises:
        ParameterError: malformed line or duplicate key
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParameterError(f"{path}:{number}: expected key=value (got {raw!r})")
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ParameterError(f"{path}:{number}: empty key")
        if key in values:
            raise ParameterError(f"{path}:{number}: duplicate key {key!r}")
        values[key] = value
    logger.debug(f"Read {len(values)} settings from {path}")
    return values


@dataclass
class CliConfig:
    """Settings of one command invocation"""
    command: str = 'eval'
    omega1: str = '1'
    omega2: str = '1.41421356'
    g: str = '0.6'
    quadrature: Dict[str, str] = field(default_factory=dict)
    output_path: Optional[Path] = None
    output_format: str = 'json'
    seed: int = Config.DEFAULT_SEED
    check_filter: Optional[List[str]] = None

    def __post_init__(self):
        errors = []
        if self.command not in COMMANDS:
            errors.append(f"unknown command {self.command!r}")
        if self.output_format not in OUTPUT_FORMATS:
            errors.append(f"output_format must be one of {OUTPUT_FORMATS} (got {self.output_format!r})")
        unknown = sorted(set(self.quadrature) - set(QUADRATURE_KEYS))
        if unknown:
            errors.append(f"unknown quadrature settings {unknown}")
        if self.seed < 0:
            errors.append("seed must be non-negative")
        if errors:
            raise ParameterError("Invalid configuration:\n" + "\n".join(errors))
        if self.output_path is not None:
            self.output_path = Path(self.output_path)

    @classmethod
    def merged(cls, command: str, file_values: Optional[Mapping[str, str]] = None,
               flags: Optional[Mapping[str, object]] = None) -> 'CliConfig':
        """File values first, then every flag that was actually given"""
        settings: Dict[str, object] = {'command': command}
        quadrature: Dict[str, str] = {}
        for source in (file_values or {}, {k: v for k, v in (flags or {}).items() if v is not None}):
            for key, value in source.items():
                if key in QUADRATURE_KEYS:
                    quadrature[key] = value
                elif key == 'check_filter' and isinstance(value, str):
                    settings[key] = [part.strip() for part in value.split(',') if part.strip()]
                elif key == 'seed':
                    settings[key] = int(value)
                elif key in cls.__dataclass_fields__ and key not in ('command', 'quadrature'):
                    settings[key] = value
                else:
                    raise ParameterError(f"unknown setting {key!r}")
        settings['quadrature'] = quadrature
        return cls(**settings)

    def model_params(self) -> ModelParams:
        return ModelParams.from_values(parse_complex(self.omega1), parse_complex(self.omega2), parse_complex(self.g))

    def quadrature_spec(self) -> QuadratureSpec:
        overrides = {key: QUADRATURE_KEYS[key](value) for key, value in self.quadrature.items()}
        return QuadratureSpec(seed=self.seed).with_overrides(**overrides)


def filter_from_text(values: Sequence[str]) -> Optional[List[str]]:
    """Flatten repeated and comma-separated --filter values; None when nothing was given"""
    out = [part.strip() for value in values for part in value.split(',') if part.strip()]
    return out or None
