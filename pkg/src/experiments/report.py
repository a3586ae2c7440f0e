"""
Experiment reports: JSON summary, per-replica CSV and a wall-time sidecar.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.experiments.runner import ReplicaBatch
from src.experiments.stats import SummaryStats, Verdict
from src.version import REPORT_SCHEMA_VERSION, __version__

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats into JSON-safe values"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [_plain(value.real), _plain(value.imag)]
    return value


def write_atomic(path: Path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


@dataclass
class ExperimentReport:
    """Merged Monte Carlo summary of one experiment run"""

    experiment: str
    config: Dict[str, Any]
    statistics: Dict[str, SummaryStats] = field(default_factory=dict)
    targets: Dict[str, Any] = field(default_factory=dict)
    ks: List[Dict[str, Any]] = field(default_factory=list)
    verdicts: List[Verdict] = field(default_factory=list)
    skipped_replicas: int = 0
    replicas: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)
    rows: List[Tuple[int, str, float]] = field(default_factory=list)
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failed_verdicts(self) -> List[Verdict]:
        return [v for v in self.verdicts if not v.passed]

    def add_batch(self, batch: ReplicaBatch, prefix: str = "", row_offset: int = 0) -> Dict[str, SummaryStats]:
        """Fold a batch into the report; returns the per-statistic summaries added"""
        summaries = batch.summaries()
        for name, stats in summaries.items():
            self.statistics[prefix + name] = stats
        for outcome in batch.kept:
            for name, value in outcome.values.items():
                self.rows.append((row_offset + outcome.index, prefix + name, float(value)))
        self.skipped_replicas += batch.skipped
        self.replicas += len(batch.outcomes)
        return summaries

    def to_dict(self) -> Dict[str, Any]:
        return _plain({
            "schema_version": REPORT_SCHEMA_VERSION,
            "generator": f"wignerspikes {__version__}",
            "experiment": self.experiment,
            "config": self.config,
            "statistics": [stats.to_dict(name) for name, stats in self.statistics.items()],
            "targets": self.targets,
            "ks": self.ks,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
            "skipped_replicas": self.skipped_replicas,
            "replicas": self.replicas,
            "extras": self.extras,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["replica", "statistic_name", "value"])
        for replica, name, value in sorted(self.rows, key=lambda row: row[0]):
            writer.writerow([replica, name, repr(value)])
        return buffer.getvalue()

    def basename(self) -> str:
        seed = self.config.get("master_seed", 0)
        return f"{self.experiment}-seed{seed}"

    def write(self, output_dir: Path) -> Dict[str, Path]:
        """Write ``<name>.json``, ``<name>.csv`` and ``<name>.timing.json``"""
        output_dir = Path(output_dir)
        name = self.basename()
        paths = {
            "json": write_atomic(output_dir / f"{name}.json", self.to_json()),
            "csv": write_atomic(output_dir / f"{name}.csv", self.to_csv()),
        }
        if self.wall_time is not None:
            timing = {"experiment": self.experiment, "wall_time_seconds": round(self.wall_time, 3)}
            paths["timing"] = write_atomic(output_dir / f"{name}.timing.json", json.dumps(timing, indent=2) + "\n")
        logger.info(f"Report written to {paths['json']}")
        return paths
