"""
Outlier experiment: location and fluctuations of the eigenvalues of X_N + A_N
that separate from the bulk.
"""

import logging
import math
import time
from typing import Any, Dict, List, Tuple

import numpy as np

from src.deformation.frames import Frame, build_frames
from src.ensemble.wigner import sample_wigner, truncate_center
from src.experiments.config import ExperimentConfig
from src.experiments.report import ExperimentReport
from src.experiments.runner import run_replicas
from src.experiments.stats import SummaryStats, Verdict, ks_statistic, mean_verdict, variance_verdict
from src.spectral.deformed import deformed_spectrum, outlier_slots
from src.theory.limits import CaseALimit, caseB_limit
from src.theory.semicircle import c_theta, outlier_location
from src.utils.errors import WignerSpikesError
from src.utils.rng import stream

logger = logging.getLogger(__name__)

# spawn-key prefix of the limit-law draws; replica streams use one-element keys
THEORY_STREAM = 2 ** 32


def supercritical_spikes(cfg: ExperimentConfig) -> List[int]:
    """Indices of spikes with |theta| > sigma, or nothing-to-measure"""
    indices = [j for j, spike in enumerate(cfg.spikes.spikes) if abs(spike.theta) > cfg.sigma]
    if not indices:
        raise WignerSpikesError(
            "nothing-to-measure",
            f"no spike exceeds sigma={cfg.sigma}: thetas {cfg.spikes.thetas}",
        )
    return indices


def canonical_block(frame: Frame) -> np.ndarray:
    """K x k block of a canonical frame restricted to its nonzero rows"""
    rows = np.flatnonzero(np.any(frame.columns != 0, axis=1))
    return frame.columns[rows, :]


def limit_draws(sample, rng: np.random.Generator, draws: int) -> np.ndarray:
    """``draws`` x k array of ordered limit eigenvalues"""
    return np.vstack([sample(rng) for _ in range(draws)])


class OutlierTheory:
    """Theory targets for the outliers of one spike"""

    def __init__(self, cfg: ExperimentConfig, index: int, frame: Frame):
        spike = cfg.spikes.spikes[index]
        self.index = index
        self.theta = spike.theta
        self.k = spike.mult
        self.rho = outlier_location(spike.theta, cfg.sigma)
        self.c = c_theta(spike.theta, cfg.sigma)
        self.case = "A" if spike.frame == "canonical" else "B"
        self.draws = None
        if self.case == "B":
            profile = cfg.law.moments(cfg.beta)
            self.limit = caseB_limit(spike.theta, cfg.sigma, cfg.beta, frame, profile, cfg.n)
        else:
            self.limit = CaseALimit(spike.theta, cfg.sigma, cfg.beta, cfg.law, canonical_block(frame))
        if self.closed_form:
            self.mean = [self.limit.outlier_mean()]
            self.variance = [self.limit.outlier_variance()]
            self.mean_se = [0.0]
        else:
            rng = stream(cfg.master_seed, THEORY_STREAM, index)
            self.draws = limit_draws(self.limit.sample, rng, cfg.theory_draws)
            self.mean = self.draws.mean(axis=0).tolist()
            self.variance = self.draws.var(axis=0, ddof=1).tolist()
            self.mean_se = (self.draws.std(axis=0, ddof=1) / math.sqrt(cfg.theory_draws)).tolist()
        logger.debug(f"Spike {index}: case {self.case}, rho={self.rho:.6f}, c={self.c:.6f}")

    @property
    def closed_form(self) -> bool:
        return self.case == "B" and self.k == 1

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "theta": self.theta,
            "rho": self.rho,
            "c_theta": self.c,
            "case": self.case,
            "mult": self.k,
            "mean": self.mean,
            "variance": self.variance,
            "source": "closed-form" if self.closed_form else "limit-draws",
        }
        if self.draws is not None:
            data["draws"] = int(self.draws.shape[0])
        return data


def outlier_statistics(values: np.ndarray, theories: List[OutlierTheory], slots: List[List[int]],
                       n: int) -> Dict[str, float]:
    """lambda and s = c_theta sqrt(N) (lambda - rho) for every outlier, ascending within a spike"""
    out: Dict[str, float] = {}
    root_n = math.sqrt(n)
    for theory in theories:
        j = theory.index
        scaled = []
        for i, slot in enumerate(slots[j], start=1):
            lam = float(values[slot])
            s = theory.c * root_n * (lam - theory.rho)
            out[f"spike{j}.lambda{i}"] = lam
            out[f"spike{j}.s{i}"] = s
            scaled.append(s)
        if len(scaled) == 2:
            out[f"spike{j}.gap"] = scaled[1] - scaled[0]
    return out


def outlier_verdicts(cfg: ExperimentConfig, theory: OutlierTheory,
                     stats: Dict[str, SummaryStats], columns: Dict[str, np.ndarray]) -> Tuple[List[Verdict], List[Dict[str, Any]]]:
    tol = cfg.tolerances
    j = theory.index
    verdicts: List[Verdict] = []
    ks_rows: List[Dict[str, Any]] = []
    for i in range(1, theory.k + 1):
        if theory.k == 1:
            verdicts.append(mean_verdict(f"spike{j}.lambda{i}.mean", stats[f"spike{j}.lambda{i}"],
                                         theory.rho + theory.mean[0] / (theory.c * math.sqrt(cfg.n)), tol.mean_abs))
        name = f"spike{j}.s{i}"
        verdicts.append(mean_verdict(f"{name}.mean", stats[name], theory.mean[i - 1], tol.s_mean_abs,
                                     extra_se=theory.mean_se[i - 1]))
        verdicts.append(variance_verdict(f"{name}.variance", stats[name], theory.variance[i - 1],
                                         tol.variance_rel, tol.variance_abs))
        if theory.closed_form and stats[name].count >= 20:
            d, p = ks_statistic(columns[name], theory.mean[0], theory.variance[0])
            ks_rows.append({"name": name, "statistic": d, "p_value": p, "count": stats[name].count,
                            "target_mean": theory.mean[0], "target_variance": theory.variance[0]})
            verdicts.append(Verdict(name=f"{name}.ks", rule="p-above", empirical=p, target=tol.ks_p))
    return verdicts, ks_rows


def run_outlier_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Monte Carlo check of outlier locations and their fluctuation laws.

    Per replica: sample X_N (optionally truncated and centred), take the
    spectrum of X_N + A_N and record lambda and s = c_theta sqrt(N)(lambda - rho)
    for every outlier. Delocalized frames are compared with the GOE/GUE limit
    (closed form for a simple spike), canonical frames with draws of
    U^*(W + H)U. Negative spikes are measured at the bottom of the spectrum.

    Raises:
        WignerSpikesError: nothing-to-measure when no spike exceeds sigma
    """
    started = time.perf_counter()
    indices = supercritical_spikes(cfg)
    n = cfg.n
    frames = build_frames(cfg.spikes, n)
    slots = outlier_slots(cfg.spikes, cfg.sigma)
    theories = [OutlierTheory(cfg, j, frames[j]) for j in indices]
    logger.info(f"Outlier experiment: n={n}, beta={cfg.beta}, spikes={cfg.spikes.thetas}, replicas={cfg.replicas}")

    def replica(index: int, seed: int) -> Dict[str, float]:
        x = sample_wigner(cfg.law, n, cfg.beta, seed)
        if cfg.truncate:
            x = truncate_center(x)
        values = deformed_spectrum(x, cfg.spikes, frames, cfg.solver).values
        return outlier_statistics(values, theories, slots, n)

    batch = run_replicas(replica, cfg.replicas, cfg.master_seed, cfg.workers, label="outliers")
    report = ExperimentReport(experiment=cfg.experiment, config=cfg.echo())
    stats = report.add_batch(batch)
    columns = {name: batch.column(name) for name in batch.names()}

    for theory in theories:
        report.targets[f"spike{theory.index}"] = theory.to_dict()
        verdicts, ks_rows = outlier_verdicts(cfg, theory, stats, columns)
        report.verdicts.extend(verdicts)
        report.ks.extend(ks_rows)
        if theory.k == 2 and theory.draws is not None:
            gaps = theory.draws[:, 1] - theory.draws[:, 0]
            report.extras[f"spike{theory.index}.gap"] = {
                "empirical_mean": stats[f"spike{theory.index}.gap"].mean,
                "empirical_variance": stats[f"spike{theory.index}.gap"].variance,
                "limit_draw_mean": float(gaps.mean()),
                "limit_draw_variance": float(gaps.var(ddof=1)),
            }

    report.wall_time = time.perf_counter() - started
    logger.info(f"Outlier experiment finished: {len(report.failed_verdicts)} of {len(report.verdicts)} verdicts failed")
    return report
