"""
Report Service - Output Layer

Writes verification reports, summaries, sweep tables and evaluation records.
Every file is written to a temporary file in the target directory first and
then moved into place.
"""

import json
import os
import re
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import pandas as pd

from config import Config
from src.utils.logging import setup_logger
from src.verify import CheckReport

logger = setup_logger(__name__)

SUMMARY_COLUMNS = ['relation_id', 'n', 'params_hash', 'max_rel_err', 'budget', 'passed', 'runtime_ms']
RECORD_COLUMNS = ['axis_value', 're', 'im', 'err_est']


def safe_name(name: str) -> str:
    """Reduce a report name to a plain file name"""
    name = os.path.basename(str(name)).strip()
    name = re.sub(r'[^\w\-.]', '_', name)
    name = name.lstrip('.')
    if not name:
        raise ValueError("report name is empty after sanitization")
    return name[:200]


class ReportService:
    """Service for writing and reading report files"""

    def __init__(self, output_dir: Path = None):
        """
        Initialize report service

        Args:
            output_dir: Directory for report files (Config.OUTPUT_DIR by default)
        """
        self.output_dir = Path(output_dir or Config.OUTPUT_DIR)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _target(self, name: str, suffix: str) -> Path:
        name = safe_name(name)
        if not name.endswith(suffix):
            name += suffix
        return self.output_dir / name

    def _atomic_write(self, path: Path, text: str) -> Path:
        """Write text next to the target, then move it into place"""
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix='.tmp')
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
                handle.write(text)
            os.replace(tmp, path)
        except Exception:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        logger.info(f"Wrote {path}")
        return path

    def write_reports(self, reports: Sequence[CheckReport], name: str = 'reports') -> Path:
        """JSON array of CheckReport records"""
        body = json.dumps([r.to_dict() for r in reports], indent=2)
        return self._atomic_write(self._target(name, '.json'), body + '\n')

    def write_summary(self, reports: Sequence[CheckReport], name: str = 'summary') -> Path:
        """
        One row per (relation_id, n, params_hash) with the worst relative error,
        the largest error budget, the joint pass flag and the total runtime
        """
        return self._atomic_write(self._target(name, '.csv'), self.summary_frame(reports).to_csv(index=False))

    @staticmethod
    def summary_frame(reports: Sequence[CheckReport]) -> pd.DataFrame:
        if not reports:
            return pd.DataFrame(columns=SUMMARY_COLUMNS)
        df = pd.DataFrame([{
            'relation_id': r.relation_id,
            'n': r.n,
            'params_hash': r.params_hash,
            'rel_err': r.rel_err,
            'err_budget': r.err_budget,
            'passed': r.passed,
            'runtime_ms': r.runtime_ms,
        } for r in reports])
        summary = df.groupby(['relation_id', 'n', 'params_hash'], sort=True).agg(
            max_rel_err=('rel_err', 'max'),
            budget=('err_budget', 'max'),
            passed=('passed', 'all'),
            runtime_ms=('runtime_ms', 'sum'),
        ).reset_index()
        return summary[SUMMARY_COLUMNS]

    def write_records(self, rows: Iterable[Dict], name: str = 'sweep') -> Path:
        """Plot-ready CSV with the columns axis_value, re, im, err_est"""
        df = pd.DataFrame(list(rows), columns=RECORD_COLUMNS)
        return self._atomic_write(self._target(name, '.csv'), df.to_csv(index=False))

    def write_json(self, obj: Dict, name: str) -> Path:
        return self._atomic_write(self._target(name, '.json'), json.dumps(obj, indent=2) + '\n')

    @staticmethod
    def load_reports(path: Path) -> List[CheckReport]:
        """
        Read a JSON array written by write_reports

        Raises:
            ValueError: the file does not hold a list of reports
        """
        data = json.loads(Path(path).read_text(encoding='utf-8'))
        if not isinstance(data, list):
            raise ValueError(f"{path} does not contain a list of reports")
        return [CheckReport.from_dict(item) for item in data]
