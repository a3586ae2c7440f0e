"""
Monte Carlo experiments, statistics and reports
"""

from src.experiments.stats import SummaryStats, Verdict, ks_statistic, kolmogorov_survival, normal_cdf
from src.experiments.config import EXPERIMENTS, ExperimentConfig, Tolerances, parse_complex
from src.experiments.runner import ReplicaBatch, ReplicaOutcome, ReplicaRunner, run_replicas
from src.experiments.report import ExperimentReport, write_atomic
from src.experiments.outliers import run_outlier_experiment
from src.experiments.xi_proxy import run_xi_proxy_experiment
from src.experiments.resolvent import run_resolvent_experiment
from src.experiments.testfn import run_testfn_experiment
from src.experiments.steinitz_demo import run_steinitz_demo

RUNNERS = {
    "outliers": run_outlier_experiment,
    "xi-proxy": run_xi_proxy_experiment,
    "resolvent": run_resolvent_experiment,
    "testfn": run_testfn_experiment,
    "steinitz-demo": run_steinitz_demo,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Dispatch on ``cfg.experiment``"""
    return RUNNERS[cfg.experiment](cfg)


__all__ = [
    'SummaryStats',
    'Verdict',
    'ks_statistic',
    'kolmogorov_survival',
    'normal_cdf',
    'EXPERIMENTS',
    'ExperimentConfig',
    'Tolerances',
    'parse_complex',
    'ReplicaBatch',
    'ReplicaOutcome',
    'ReplicaRunner',
    'run_replicas',
    'ExperimentReport',
    'write_atomic',
    'run_outlier_experiment',
    'run_xi_proxy_experiment',
    'run_resolvent_experiment',
    'run_testfn_experiment',
    'run_steinitz_demo',
    'RUNNERS',
    'run_experiment',
]
