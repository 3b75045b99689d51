"""
Configuration Management for ruij-lab

Centralized configuration using environment variables with sensible defaults.
Create a .env file in the project root to override these values.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Application configuration"""

    # Base paths
    BASE_DIR = Path(os.getenv('RUIJ_LAB_BASE_DIR', Path(__file__).parent))
    OUTPUT_DIR = Path(os.getenv('RUIJ_LAB_OUTPUT_DIR', BASE_DIR / 'output'))

    # Worker pool for verification jobs
    THREADS = int(os.getenv('RUIJ_LAB_THREADS', 1))

    # Reproducibility
    DEFAULT_SEED = int(os.getenv('RUIJ_LAB_SEED', 0))

    # Monitoring
    SLOW_CALL_SECONDS = float(os.getenv('RUIJ_LAB_SLOW_CALL_SECONDS', 60.0))

    # Logging
    LOG_LEVEL = os.getenv('RUIJ_LAB_LOG_LEVEL', 'INFO')
    LOG_TO_FILE = os.getenv('RUIJ_LAB_LOG_TO_FILE', 'True').lower() == 'true'
    LOG_FILE = BASE_DIR / 'logs' / 'ruij_lab.log'
    LOG_MAX_BYTES = int(os.getenv('LOG_MAX_BYTES', 10 * 1024 * 1024))  # 10MB
    LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', 5))

    @classmethod
    def init_app(cls):
        """Initialize application directories"""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        if cls.LOG_TO_FILE:
            cls.LOG_FILE.parent.mkdir(parents=True, exist_ok=True)

    @classmethod
    def validate(cls):
        """Validate configuration"""
        errors = []

        if cls.THREADS < 1:
            errors.append("RUIJ_LAB_THREADS must be at least 1")

        if cls.DEFAULT_SEED < 0:
            errors.append("RUIJ_LAB_SEED must be non-negative")

        if cls.SLOW_CALL_SECONDS <= 0:
            errors.append("RUIJ_LAB_SLOW_CALL_SECONDS must be positive")

        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"RUIJ_LAB_LOG_LEVEL is not a logging level: {cls.LOG_LEVEL}")

        if errors:
            raise ValueError("Configuration errors:\n" + "\n".join(errors))

        return True


class QuadratureDefaults:
    """Default accuracy and truncation settings for the integrators"""
    REL_TOL = 1e-10
    ABS_TOL = 1e-12
    MAX_SUBDIVISIONS = 4000
    TRUNCATION_SAFETY = 0.2
    OSC_PANEL_FACTOR = 0.25
    QMC_SAMPLES = 2 ** 16
    QMC_REL_FLOOR = 1e-2
    SINGULARITY_RADIUS_FACTOR = 1e-6  # times |omega1 + omega2|
    STRIP_MARGIN_FACTOR = 0.05  # times Re(omega1 + omega2)
    S2_TOL_CEILING = 1e-12
    S2_MAX_NODES = 400_000
    S2_NODES_PER_PANEL = 20
    MAX_PERIOD_ARG = 0.7853981633974483  # pi / 4
    COMPLEX_PERIOD_TOL = 1e-8
    LATTICE_SHRINK = 0.8  # usable fraction of the analyticity half-width


class VerifyDefaults:
    """Tolerance floors and parameter grid for the verification suites"""
    BUDGET_SAFETY = 3.0
    WORKING_TOL_FACTOR = 30.0  # integrators run this much tighter than the floor
    ABS_FLOOR = 1e-14
    SAMPLE_BOUND = 2.0
    LAMBDA_BOUND = 0.5
    EPSILON = 0.5
    FOURIER_COUPLINGS = (0.6, 0.8)
    FOURIER_GRID = 20
    ASYMPTOTIC_RADII = (20.0, 40.0, 80.0)  # times 1 / nu_g
    S2_SAMPLES = 100
    KERNEL_IDENTITY_DRAWS = 200
    KERNEL_IDENTITY_MAX_N = 4
    THREE_POINT_DRAWS = 1_000_000
    FUZZ_DRAWS = 100_000
    FUZZ_MAX_N = 6
    WAVE_BOUND_POINTS = 6

    # Samples per relation and n
    SAMPLES = {
        'qq_commutativity_1': 20,
        'qq_commutativity_2': 5,
        'ql_exchange': 5,
        'q_eigen_1': 5,
        'q_eigen_2': 3,
        'dual_q_eigen_1': 5,
        'dual_q_eigen_2': 3,
        'duality_2': 10,
        'duality_3': 2,
        'macdonald_1': 3,
        'macdonald_2': 3,
        'dual_macdonald': 2,
        'lambda_symmetry_2': 3,
        'lambda_symmetry_3': 1,
        'x_symmetry': 3,
        'period_swap': 3,
    }
    DEFAULT_PERIODS = ((1.0, 1.41421356), (0.3, 1.0), (1 + 0.2j, 1.3 - 0.1j))
    DEFAULT_COUPLINGS = (0.4, 0.6, 0.5 + 0.1j)
    MACDONALD_PERIODS = (0.3, 1.0)
    MACDONALD_COUPLING = 0.4
    DUAL_MACDONALD_PERIODS = (1.0, 10.0 / 3.0)
    DUAL_MACDONALD_COUPLING = 3.0

    # Relative tolerance floors per relation
    FLOORS = {
        's2_real': 1e-10,
        's2_complex': 1e-8,
        's2_reflection': 1e-9,
        's2_ladder': 1e-9,
        'fourier_k': 1e-6,
        'fourier_k_edge': 1e-5,
        'mu_k_asymptotics': 1e-3,
        'qq_commutativity_1': 1e-6,
        'qq_commutativity_2': 1e-4,
        'ql_exchange': 1e-5,
        'q_eigen_1': 1e-8,
        'q_eigen_2': 1e-4,
        'dual_q_eigen_1': 1e-8,
        'dual_q_eigen_2': 1e-4,
        'duality_2': 1e-6,
        'duality_3': 1e-3,
        'macdonald_1': 1e-12,
        'macdonald_2': 1e-4,
        'dual_macdonald': 1e-4,
        'lambda_symmetry_2': 1e-6,
        'lambda_symmetry_3': 1e-3,
        'x_symmetry': 1e-6,
        'period_swap': 1e-6,
        'kernel_identity': 1e-10,
        'inequalities': 0.0,
        'wave_bound': 1e-6,
    }


# Initialize on import
Config.init_app()
