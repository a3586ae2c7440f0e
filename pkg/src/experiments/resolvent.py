"""
Resolvent experiment: centering and joint Gaussian fluctuations of
<u^l, R(z) u^p> for delocalized unit vectors.
"""

import logging
import math
import time
from typing import Dict, List, Tuple

import numpy as np

from src.deformation.frames import build_frames
from src.ensemble.entry_laws import m3_quadform
from src.ensemble.wigner import sample_wigner, truncate_center
from src.experiments.config import ExperimentConfig
from src.experiments.report import ExperimentReport
from src.experiments.runner import run_replicas
from src.experiments.stats import SummaryStats, Verdict, ks_statistic
from src.spectral.eigensolver import EigenSolver
from src.spectral.resolvent import ResolventForms
from src.theory.semicircle import gamma_covariance, outlier_location, stieltjes_g
from src.utils.errors import WignerSpikesError

logger = logging.getLogger(__name__)

COVARIANCE_PARTS = (("re", "re"), ("re", "im"), ("im", "re"), ("im", "im"))


def spike_vectors(cfg: ExperimentConfig, n: int, minimum: int = 1) -> np.ndarray:
    """Columns of every delocalized (non-canonical) frame, side by side"""
    frames = build_frames(cfg.spikes, n)
    blocks = [frame.columns for frame, spike in zip(frames, cfg.spikes.spikes) if spike.frame != "canonical"]
    count = sum(block.shape[1] for block in blocks)
    if count < minimum:
        raise WignerSpikesError(
            "nothing-to-measure",
            f"need at least {minimum} delocalized vector(s), the spikes provide {count}",
        )
    return np.hstack(blocks)


def index_pairs(k: int) -> List[Tuple[int, int]]:
    return [(l, p) for l in range(k) for p in range(l, k)]


def evaluation_points(cfg: ExperimentConfig) -> List[complex]:
    points = list(cfg.z_points)
    if cfg.include_outlier_points:
        for spike in cfg.spikes.spikes:
            rho = outlier_location(spike.theta, cfg.sigma)
            if rho is not None:
                points.append(complex(rho, 0.0))
    if not points:
        raise WignerSpikesError("nothing-to-measure", "no evaluation points for the resolvent")
    return points


def run_resolvent_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Two-pass Monte Carlo check of the resolvent quadratic forms.

    Pass one records <u^l, R(z) u^p> for every pair l <= p and every z from a
    single eigendecomposition per replica. Pass two centres by the
    across-replica mean, forms G = sqrt(N)(form - mean) and compares
    covariances of Re/Im parts with ``gamma_covariance``; the means are
    compared with delta_lp g(z) + g(z)^4 m3(u^l, u^p) / sqrt(N).
    """
    started = time.perf_counter()
    n = cfg.n
    sigma = cfg.sigma
    vectors = spike_vectors(cfg, n, minimum=2)
    points = evaluation_points(cfg)
    pairs = index_pairs(vectors.shape[1])
    solver = EigenSolver(cfg.solver)
    tol = cfg.tolerances
    logger.info(f"Resolvent experiment: n={n}, {vectors.shape[1]} vectors, z={points}, replicas={cfg.replicas}")

    def replica(index: int, seed: int) -> Dict[str, float]:
        x = sample_wigner(cfg.law, n, cfg.beta, seed)
        if cfg.truncate:
            x = truncate_center(x)
        quadforms = ResolventForms(solver.decompose(x.matrix, want_vectors=True), vectors)
        out = {}
        for a, z in enumerate(points):
            forms = quadforms.matrix(z)
            for l, p in pairs:
                out[f"z{a}.l{l}p{p}.re"] = float(forms[l, p].real)
                out[f"z{a}.l{l}p{p}.im"] = float(forms[l, p].imag)
        return out

    batch = run_replicas(replica, cfg.replicas, cfg.master_seed, cfg.workers, label="resolvent")
    report = ExperimentReport(experiment=cfg.experiment, config=cfg.echo())
    stats = report.add_batch(batch)
    report.extras["z_points"] = [[z.real, z.imag] for z in points]
    if not batch.kept:
        report.verdicts.append(Verdict(name="skip_rate", rule="at-most", empirical=1.0, target=tol.skip_rate))
        return report

    profile = cfg.law.moments(cfg.beta)
    root_n = math.sqrt(n)
    centred: Dict[str, np.ndarray] = {}
    for name in batch.names():
        column = batch.column(name)
        centred[name] = root_n * (column - column.mean())

    for a, z in enumerate(points):
        g = stieltjes_g(z, sigma).g
        for l, p in pairs:
            shift = complex(m3_quadform(profile, vectors[:, l], vectors[:, p]))
            expected = (g if l == p else 0.0) + g ** 4 * shift / root_n
            key = f"z{a}.l{l}p{p}"
            report.targets[f"{key}.mean"] = [expected.real, expected.imag]
            for part, value in (("re", expected.real), ("im", expected.imag)):
                report.verdicts.append(_centering_verdict(f"{key}.{part}", stats[f"{key}.{part}"],
                                                          value, tol.centering_abs))

    for a, za in enumerate(points):
        for b in range(a, len(points)):
            zb = points[b]
            for l, p in pairs:
                target = gamma_covariance(za, zb, l == p, cfg.beta, sigma)
                key = f"z{a}z{b}.l{l}p{p}"
                report.targets[f"{key}.covariance"] = target.tolist()
                for row, col in ((0, 0), (0, 1), (1, 0), (1, 1)):
                    part_a, part_b = COVARIANCE_PARTS[2 * row + col]
                    product = centred[f"z{a}.l{l}p{p}.{part_a}"] * centred[f"z{b}.l{l}p{p}.{part_b}"]
                    se = float(product.std(ddof=1) / math.sqrt(product.size)) if product.size > 1 else None
                    report.verdicts.append(Verdict(
                        name=f"{key}.{part_a}{part_b}", rule="abs-or-se", empirical=float(product.mean()),
                        target=float(target[row, col]), tolerance=tol.covariance_abs, standard_error=se,
                    ))
            if a == b:
                _record_ks(report, a, pairs, centred, za, cfg)

    rate = report.skipped_replicas / report.replicas
    report.verdicts.append(Verdict(name="skip_rate", rule="at-most", empirical=rate, target=tol.skip_rate))
    report.wall_time = time.perf_counter() - started
    logger.info(f"Resolvent experiment finished: {len(report.failed_verdicts)} of {len(report.verdicts)} verdicts failed")
    return report


def _centering_verdict(name: str, stats: SummaryStats, target: float, tolerance: float) -> Verdict:
    return Verdict(name=f"{name}.centering", rule="abs-or-se", empirical=stats.mean, target=target,
                   tolerance=tolerance, standard_error=stats.std_error if stats.count > 1 else None)


def _record_ks(report: ExperimentReport, a: int, pairs, centred: Dict[str, np.ndarray],
               z: complex, cfg: ExperimentConfig) -> None:
    """KS of each centred part against its Gaussian limit; recorded without a verdict"""
    for l, p in pairs:
        target = gamma_covariance(z, z, l == p, cfg.beta, cfg.sigma)
        for idx, part in enumerate(("re", "im")):
            variance = float(target[idx, idx])
            sample = centred[f"z{a}.l{l}p{p}.{part}"]
            if variance <= 1e-12 or sample.size < 20:
                continue
            d, pval = ks_statistic(sample, 0.0, variance)
            report.ks.append({"name": f"z{a}.l{l}p{p}.{part}", "statistic": d, "p_value": pval,
                              "count": int(sample.size), "target_mean": 0.0, "target_variance": variance})
