"""
Monitoring Utilities

Duration statistics for evaluations and verification jobs, and the resource
snapshot attached to verify summaries.
"""

import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from functools import wraps
from typing import Dict, Iterator, List, Optional, Tuple

import psutil

from config import Config
from src.utils.logging import setup_logger

logger = setup_logger(__name__)

MB = 1024 ** 2


@dataclass
class OperationStats:
    """Running duration statistics of one operation"""
    count: int = 0
    failures: int = 0
    total_time: float = 0.0
    min_time: float = float('inf')
    max_time: float = 0.0

    def add(self, duration: float, failed: bool = False):
        self.count += 1
        self.failures += int(failed)
        self.total_time += duration
        self.min_time = min(self.min_time, duration)
        self.max_time = max(self.max_time, duration)

    @property
    def avg_time(self) -> float:
        return self.total_time / self.count if self.count else 0.0

    def to_dict(self) -> Dict:
        return {
            'count': self.count,
            'failures': self.failures,
            'total_time': self.total_time,
            'min_time': self.min_time,
            'max_time': self.max_time,
            'avg_time': self.avg_time,
        }


class PerformanceTracker:
    """Thread-safe duration statistics keyed by operation ('eval.psi', 'verify.s2[0]', ...)"""

    def __init__(self):
        self._metrics: Dict[str, OperationStats] = {}
        self._lock = threading.Lock()

    def record(self, operation: str, duration: float, failed: bool = False):
        """
        Record one duration

        Args:
            operation: Operation name
            duration: Duration in seconds
            failed: The operation raised
        """
        with self._lock:
            self._metrics.setdefault(operation, OperationStats()).add(duration, failed)

    def get_stats(self, operation: Optional[str] = None) -> Dict[str, Dict]:
        """Statistics of one operation (empty if unknown) or of all of them"""
        with self._lock:
            if operation is not None:
                stats = self._metrics.get(operation)
                return {operation: stats.to_dict()} if stats else {}
            return {op: stats.to_dict() for op, stats in self._metrics.items()}

    def slowest(self, prefix: str = '', limit: int = 5) -> List[Tuple[str, float]]:
        """Operations under a name prefix by total time, largest first"""
        with self._lock:
            items = [(op, stats.total_time) for op, stats in self._metrics.items() if op.startswith(prefix)]
        return sorted(items, key=lambda item: item[1], reverse=True)[:limit]

    def reset(self, prefix: str = ''):
        """Drop the operations under a name prefix (all of them by default)"""
        with self._lock:
            for op in [op for op in self._metrics if op.startswith(prefix)]:
                del self._metrics[op]


# Global performance tracker
perf_tracker = PerformanceTracker()


@contextmanager
def timed(operation: str, tracker: Optional[PerformanceTracker] = None) -> Iterator[None]:
    """Record the duration of the block; an exception counts as a failure and is re-raised"""
    tracker = tracker or perf_tracker
    started = time.perf_counter()
    try:
        yield
    except Exception:
        tracker.record(operation, time.perf_counter() - started, failed=True)
        raise
    tracker.record(operation, time.perf_counter() - started)


def monitor_performance(func):
    """Log and record the duration of every call; warn above Config.SLOW_CALL_SECONDS"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        started = time.perf_counter()
        try:
            with timed(func.__name__):
                result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"{func.__name__} failed after {time.perf_counter() - started:.2f}s: {e}")
            raise

        elapsed = time.perf_counter() - started
        logger.info(f"{func.__name__} completed in {elapsed:.2f}s")
        if elapsed > Config.SLOW_CALL_SECONDS:
            logger.warning(f"{func.__name__} took {elapsed:.2f}s (slow)")
        return result

    return wrapper


def memory_usage() -> Dict:
    """Machine memory and resident size of this process, in MB"""
    try:
        memory = psutil.virtual_memory()
        rss = psutil.Process().memory_info().rss
    except psutil.Error as e:
        logger.warning(f"Memory usage unavailable: {e}")
        return {'error': str(e)}
    return {
        'total_mb': round(memory.total / MB, 2),
        'available_mb': round(memory.available / MB, 2),
        'process_rss_mb': round(rss / MB, 2),
    }


def resource_snapshot() -> Dict:
    """Wall and CPU time of the process, memory and CPU count"""
    process = psutil.Process()
    cpu = process.cpu_times()
    return {
        'wall_seconds': round(time.time() - process.create_time(), 3),
        'cpu_seconds': round(cpu.user + cpu.system, 3),
        'memory': memory_usage(),
        'cpu_count': psutil.cpu_count(logical=True),
    }
