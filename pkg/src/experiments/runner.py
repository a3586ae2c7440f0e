"""
Parallel replica execution with deterministic, index-ordered folding.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.experiments.stats import SummaryStats
from src.utils.errors import NearSingularShiftError
from src.utils.rng import replica_seed

logger = logging.getLogger(__name__)


@dataclass
class ReplicaOutcome:
    """Named statistics of one replica, or the reason it was skipped"""

    index: int
    seed: int
    values: Dict[str, float] = field(default_factory=dict)
    skipped: bool = False
    reason: str = ""


ReplicaTask = Callable[[int, int], Dict[str, float]]


@dataclass
class ReplicaBatch:
    """All outcomes of one run, in replica order"""

    outcomes: List[ReplicaOutcome]
    label: str = ""

    @property
    def kept(self) -> List[ReplicaOutcome]:
        return [o for o in self.outcomes if not o.skipped]

    @property
    def skipped(self) -> int:
        return sum(1 for o in self.outcomes if o.skipped)

    @property
    def skip_rate(self) -> float:
        return self.skipped / len(self.outcomes) if self.outcomes else 0.0

    def names(self) -> List[str]:
        """Statistic names in first-seen order"""
        seen: Dict[str, None] = {}
        for outcome in self.kept:
            for name in outcome.values:
                seen.setdefault(name, None)
        return list(seen)

    def column(self, name: str) -> np.ndarray:
        return np.array([o.values[name] for o in self.kept if name in o.values], dtype=np.float64)

    def summaries(self) -> Dict[str, SummaryStats]:
        """One SummaryStats per statistic, folded in replica order"""
        stats: Dict[str, SummaryStats] = {}
        for outcome in self.kept:
            for name, value in outcome.values.items():
                stats.setdefault(name, SummaryStats()).push(value)
        return stats


class ReplicaRunner:
    """Runs independent replicas on a thread pool.

    Each replica receives ``(index, seed)`` with the seed derived from
    ``(master_seed, index + offset)``, so results do not depend on the
    number of workers. numpy and LAPACK release the GIL for the heavy work.

    Args:
        workers: Maximum number of concurrent replicas
        label: Name used in progress messages
    """

    def __init__(self, workers: int = 1, label: str = "replicas"):
        self.workers = max(1, int(workers))
        self.label = label

    def _run_one(self, task: ReplicaTask, index: int, seed: int) -> ReplicaOutcome:
        try:
            return ReplicaOutcome(index=index, seed=seed, values=task(index, seed))
        except NearSingularShiftError as e:
            logger.warning(f"{self.label}: replica {index} skipped: {e.message}")
            return ReplicaOutcome(index=index, seed=seed, skipped=True, reason=e.code)

    def run(self, task: ReplicaTask, replicas: int, master_seed: int, offset: int = 0) -> ReplicaBatch:
        """Run ``replicas`` replicas and return their outcomes in index order"""
        seeds = [replica_seed(master_seed, offset + i) for i in range(replicas)]
        step = max(1, math.ceil(replicas / 10))
        outcomes: List[Optional[ReplicaOutcome]] = [None] * replicas
        logger.info(f"{self.label}: running {replicas} replicas on {self.workers} worker(s)")

        if self.workers == 1:
            results = (self._run_one(task, i, seeds[i]) for i in range(replicas))
            self._collect(results, outcomes, replicas, step)
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                results = executor.map(lambda i: self._run_one(task, i, seeds[i]), range(replicas))
                self._collect(results, outcomes, replicas, step)

        return ReplicaBatch(outcomes=list(outcomes), label=self.label)

    def _collect(self, results, outcomes: List[Optional[ReplicaOutcome]], replicas: int, step: int) -> None:
        for done, outcome in enumerate(results, start=1):
            outcomes[outcome.index] = outcome
            if done % step == 0 or done == replicas:
                logger.info(f"{self.label}: {done}/{replicas} replicas done")


def run_replicas(task: ReplicaTask, replicas: int, master_seed: int, workers: int = 1,
                 label: str = "replicas", offset: int = 0) -> ReplicaBatch:
    """Convenience wrapper around ``ReplicaRunner``"""
    return ReplicaRunner(workers, label).run(task, replicas, master_seed, offset)
