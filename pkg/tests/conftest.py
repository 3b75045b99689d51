"""
Pytest Configuration and Fixtures

Provides reusable parameter sets, quadrature settings and temporary
directories for the test suite.
"""

import math
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.model import ModelParams
from src.quadrature import QuadratureSpec
from src.special_functions import Periods
from src.utils.monitoring import perf_tracker

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests"""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    # Cleanup
    shutil.rmtree(temp_path)


@pytest.fixture
def real_periods():
    """Incommensurate real periods (1, sqrt 2)"""
    return Periods(1.0, SQRT2)


@pytest.fixture
def complex_periods():
    """Tilted periods used for the complex-parameter checks"""
    return Periods(1.0 + 0.2j, 1.3 - 0.1j)


@pytest.fixture
def params(real_periods):
    """Default model: w = (1, sqrt 2), g = 0.6"""
    return ModelParams(real_periods, 0.6)


@pytest.fixture
def complex_params(complex_periods):
    """Complex periods with a complex coupling"""
    return ModelParams(complex_periods, 0.5 + 0.05j)


@pytest.fixture
def macdonald_params():
    """Short first period so that the Macdonald shifts stay inside the analytic strip"""
    return ModelParams.from_values(0.3, 1.0, 0.4)


@pytest.fixture
def spec():
    """Default quadrature settings"""
    return QuadratureSpec()


@pytest.fixture
def loose_spec():
    """Loose tolerances for the expensive multi-dimensional tests"""
    return QuadratureSpec(rel_tol=1e-6, abs_tol=1e-8)


@pytest.fixture
def rng():
    """Seeded random generator"""
    return np.random.default_rng(20260)


@pytest.fixture
def clean_perf_tracker():
    """Empty performance metrics around a test"""
    perf_tracker.reset()
    yield
    perf_tracker.reset()
