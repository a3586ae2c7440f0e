"""
Tests for streaming statistics, the replica runner, reports and small
end-to-end runs of every experiment.
"""

import unittest
import sys
import math
import json
import tempfile
import shutil
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

# Add project root to path for testing
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.experiments import run_experiment
from src.experiments.report import ExperimentReport, write_atomic
from src.experiments.runner import ReplicaRunner, run_replicas
from src.experiments.stats import (
    SummaryStats,
    Verdict,
    kolmogorov_survival,
    ks_statistic,
    mean_verdict,
    variance_verdict,
)
from src.experiments.xi_proxy import null_residual
from src.theory.semicircle import c_theta, stieltjes_g
from src.utils.config import ConfigManager
from src.utils.errors import NearSingularShiftError, WignerSpikesError
from src.utils.rng import replica_seed, stream


def make_config(experiment: str, **settings):
    """ExperimentConfig from defaults plus typed settings (dots written as __)"""
    manager = ConfigManager(experiment=experiment)
    for key, value in settings.items():
        manager.set(key.replace('__', '.'), value)
    return manager.to_experiment_config()


class TestSummaryStats(unittest.TestCase):
    """Test Welford accumulation and pairwise merging."""

    def setUp(self):
        self.data = stream(1).gamma(2.0, size=500)

    def central(self, power: int) -> float:
        return float(np.sum((self.data - self.data.mean()) ** power))

    def test_matches_numpy(self):
        """Test mean, unbiased variance and central moments against numpy."""
        stats = SummaryStats.from_values(self.data)

        self.assertEqual(stats.count, 500)
        self.assertAlmostEqual(stats.mean, self.data.mean(), places=12)
        self.assertAlmostEqual(stats.variance, self.data.var(ddof=1), places=10)
        self.assertAlmostEqual(stats.m3 / self.central(3), 1.0, places=10)
        self.assertAlmostEqual(stats.m4 / self.central(4), 1.0, places=10)
        self.assertEqual(stats.min, self.data.min())
        self.assertEqual(stats.max, self.data.max())

    def test_merge_equals_single_pass(self):
        """Test that merging uneven chunks reproduces the single-pass moments."""
        whole = SummaryStats.from_values(self.data)
        merged = SummaryStats()
        for chunk in np.split(self.data, [7, 130, 131, 400]):
            merged = merged + SummaryStats.from_values(chunk)

        self.assertEqual(merged.count, whole.count)
        for attribute in ("mean", "m2", "m3", "m4"):
            with self.subTest(attribute=attribute):
                self.assertAlmostEqual(getattr(merged, attribute) / getattr(whole, attribute), 1.0, places=10)

    def test_centred_scaled(self):
        """Test statistics of factor * (x - mean)."""
        stats = SummaryStats.from_values(self.data)
        scaled = stats.centred_scaled(3.0)

        self.assertEqual(scaled.mean, 0.0)
        self.assertAlmostEqual(scaled.variance, 9.0 * stats.variance)
        self.assertAlmostEqual(scaled.max, 3.0 * (stats.max - stats.mean))

    def test_small_samples(self):
        """Test that undefined errors are reported as infinite or None."""
        stats = SummaryStats.from_values([1.0])
        self.assertEqual(stats.variance, 0.0)
        self.assertTrue(math.isinf(stats.std_error))
        self.assertIsNone(stats.to_dict("x")["std_error"])
        self.assertIsNone(SummaryStats().to_dict("empty")["min"])

    def test_variance_standard_error(self):
        """Test the fourth-moment standard error of the variance for normal data."""
        stats = SummaryStats.from_values(stream(2).standard_normal(20000))
        # Var(s^2) = 2 sigma^4 / (n - 1) for normal samples
        self.assertAlmostEqual(stats.variance_std_error, math.sqrt(2.0 / 20000), delta=0.001)


class TestKolmogorovSmirnov(unittest.TestCase):
    """Test the one-sample KS test against a normal target."""

    def test_statistic_matches_scipy(self):
        """Test D against scipy.stats.kstest."""
        sample = stream(3).normal(0.2, 1.5, size=300)
        d, _ = ks_statistic(sample, 0.0, 2.0)
        expected = scipy_stats.kstest(sample, 'norm', args=(0.0, math.sqrt(2.0))).statistic
        self.assertAlmostEqual(d, expected, places=12)

    def test_survival_function(self):
        """Test known values of the Kolmogorov distribution."""
        self.assertEqual(kolmogorov_survival(0.0), 1.0)
        self.assertAlmostEqual(kolmogorov_survival(1.36), 0.0494, delta=0.001)
        self.assertAlmostEqual(kolmogorov_survival(1.63), 0.0098, delta=0.001)
        self.assertLess(kolmogorov_survival(3.0), 1e-6)

    def test_asymptotic_p_value(self):
        """Test that p is the Kolmogorov survival function at sqrt(n) D."""
        sample = stream(5).normal(0.1, 1.0, size=150)
        d, p = ks_statistic(sample, 0.0, 1.0)

        self.assertAlmostEqual(p, kolmogorov_survival(math.sqrt(150) * d), places=14)
        self.assertAlmostEqual(p, scipy_stats.kstwobign.sf(math.sqrt(150) * d), places=8)

    def test_detects_wrong_mean(self):
        """Test that a shifted sample is rejected and a matching one is not."""
        sample = stream(4).standard_normal(2000)
        _, p_good = ks_statistic(sample, 0.0, 1.0)
        d_bad, p_bad = ks_statistic(sample + 1.0, 0.0, 1.0)

        self.assertGreater(p_good, 1e-4)
        self.assertGreater(d_bad, 0.3)
        self.assertLess(p_bad, 1e-10)

    def test_invalid_targets(self):
        """Test the sample size and variance preconditions."""
        with self.assertRaises(WignerSpikesError) as ctx:
            ks_statistic(np.zeros(19), 0.0, 1.0)
        self.assertEqual(ctx.exception.code, "invalid-target")
        with self.assertRaises(WignerSpikesError):
            ks_statistic(np.zeros(50), 0.0, 0.0)


class TestVerdicts(unittest.TestCase):
    """Test the verdict rules."""

    def test_abs_or_se(self):
        """Test that either the tolerance or three standard errors suffice."""
        self.assertTrue(Verdict("a", "abs-or-se", 1.05, 1.0, tolerance=0.1).passed)
        self.assertFalse(Verdict("a", "abs-or-se", 1.5, 1.0, tolerance=0.1).passed)
        self.assertTrue(Verdict("a", "abs-or-se", 1.5, 1.0, tolerance=0.1, standard_error=0.2).passed)
        self.assertFalse(Verdict("a", "abs-or-se", 1.5, 1.0, tolerance=0.1, standard_error=0.2,
                                 se_multiplier=0.0).passed)

    def test_other_rules(self):
        """Test p-above, at-most and strictly-decreasing."""
        self.assertTrue(Verdict("p", "p-above", 0.2, 0.01).passed)
        self.assertFalse(Verdict("p", "p-above", 0.001, 0.01).passed)
        self.assertTrue(Verdict("m", "at-most", 4.0, 4).passed)
        self.assertTrue(Verdict("d", "strictly-decreasing", 1.0, 3.0, values=[3.0, 2.0, 1.0]).passed)
        self.assertFalse(Verdict("d", "strictly-decreasing", 2.0, 3.0, values=[3.0, 2.0, 2.0]).passed)
        with self.assertRaises(WignerSpikesError):
            Verdict("x", "roughly", 1.0, 1.0)

    def test_helpers(self):
        """Test mean and variance verdict construction."""
        stats = SummaryStats.from_values([0.9, 1.1, 1.0, 1.0])
        mean = mean_verdict("m", stats, 1.0, 0.0)
        variance = variance_verdict("v", stats, 0.0067, 0.5)

        self.assertTrue(mean.passed)
        self.assertAlmostEqual(mean.standard_error, stats.std_error)
        self.assertEqual(variance.se_multiplier, 0.0)
        self.assertTrue(variance.passed)
        self.assertIn("passed", variance.to_dict())


class TestReplicaRunner(unittest.TestCase):
    """Test seeding, ordering and skipping of replicas."""

    @staticmethod
    def task(index: int, seed: int):
        return {"draw": float(stream(seed).standard_normal()), "index": float(index)}

    def test_seeds_and_order(self):
        """Test that replica i receives replica_seed(master, offset + i) in index order."""
        batch = run_replicas(self.task, 6, 42, offset=10)

        self.assertEqual([o.index for o in batch.outcomes], list(range(6)))
        self.assertEqual([o.seed for o in batch.outcomes], [replica_seed(42, 10 + i) for i in range(6)])
        np.testing.assert_array_equal(batch.column("index"), np.arange(6.0))

    def test_worker_count_does_not_matter(self):
        """Test identical summaries for one and several workers."""
        one = ReplicaRunner(1).run(self.task, 40, 7).summaries()["draw"]
        four = ReplicaRunner(4).run(self.task, 40, 7).summaries()["draw"]

        self.assertEqual(one.mean, four.mean)
        self.assertEqual(one.m4, four.m4)

    def test_near_singular_replicas_are_skipped(self):
        """Test that NearSingularShiftError skips a replica and is counted."""
        def task(index, seed):
            if index == 2:
                raise NearSingularShiftError("z hits the spectrum")
            return {"x": 1.0}

        batch = run_replicas(task, 5, 1)
        self.assertEqual(batch.skipped, 1)
        self.assertAlmostEqual(batch.skip_rate, 0.2)
        self.assertEqual(batch.outcomes[2].reason, "near-singular-shift")
        self.assertEqual(batch.summaries()["x"].count, 4)

    def test_other_errors_propagate(self):
        """Test that configuration errors abort the run."""
        def task(index, seed):
            raise WignerSpikesError("invalid-parameter", "bad")

        with self.assertRaises(WignerSpikesError):
            run_replicas(task, 3, 1)


class TestReport(unittest.TestCase):
    """Test report serialization and files."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def make_report(self) -> ExperimentReport:
        batch = run_replicas(lambda i, s: {"a": float(i), "b": math.nan if i == 0 else 1.0}, 3, 5)
        report = ExperimentReport(experiment="outliers", config={"master_seed": 5})
        report.add_batch(batch)
        report.verdicts.append(Verdict("a.mean", "abs-or-se", np.float64(1.0), 1.0))
        report.targets["z"] = complex(1.0, -2.0)
        report.wall_time = 0.25
        return report

    def test_json_is_sanitized(self):
        """Test that numpy scalars, complex and non-finite values serialize."""
        data = json.loads(self.make_report().to_json())

        self.assertEqual(data["experiment"], "outliers")
        self.assertTrue(data["passed"])
        self.assertEqual(data["targets"]["z"], [1.0, -2.0])
        b = next(s for s in data["statistics"] if s["name"] == "b")
        self.assertIsNone(b["mean"])
        self.assertEqual(data["replicas"], 3)

    def test_write_files(self):
        """Test the JSON, CSV and timing files."""
        paths = self.make_report().write(Path(self.temp_dir) / 'out')

        self.assertEqual(paths["json"].name, "outliers-seed5.json")
        csv_lines = paths["csv"].read_text(encoding='utf-8').splitlines()
        self.assertEqual(csv_lines[0], "replica,statistic_name,value")
        self.assertEqual(csv_lines[1], "0,a,0.0")
        self.assertEqual(len(csv_lines), 7)
        timing = json.loads(paths["timing"].read_text(encoding='utf-8'))
        self.assertEqual(timing["wall_time_seconds"], 0.25)
        self.assertNotIn("wall_time", paths["json"].read_text(encoding='utf-8'))

    def test_write_atomic_leaves_no_temporaries(self):
        """Test that only the target file remains after an atomic write."""
        target = Path(self.temp_dir) / 'report.json'
        write_atomic(target, "{}\n")
        write_atomic(target, "{\"x\": 1}\n")

        self.assertEqual(sorted(p.name for p in Path(self.temp_dir).iterdir()), ['report.json'])
        self.assertEqual(target.read_text(encoding='utf-8'), "{\"x\": 1}\n")


class TestOutlierExperiment(unittest.TestCase):
    """Test small outlier runs."""

    def test_simple_spike(self):
        """Test statistics, closed-form targets and KS rows for one delocalized spike."""
        cfg = make_config("outliers", n=60, replicas=30, master_seed=3,
                          spikes=[{"theta": 3.0, "mult": 1, "frame": "uniform"}])
        report = run_experiment(cfg)

        self.assertEqual(report.replicas, 30)
        self.assertIn("spike0.lambda1", report.statistics)
        self.assertIn("spike0.s1", report.statistics)
        target = report.targets["spike0"]
        self.assertEqual(target["source"], "closed-form")
        self.assertAlmostEqual(target["rho"], 3.0 + 1.0 / 3.0)
        self.assertAlmostEqual(target["variance"][0], 2.0 * 9.0 / 8.0)
        self.assertEqual(len(report.ks), 1)
        names = {v.name for v in report.verdicts}
        self.assertEqual(names, {"spike0.lambda1.mean", "spike0.s1.mean", "spike0.s1.variance", "spike0.s1.ks"})
        self.assertAlmostEqual(report.statistics["spike0.lambda1"].mean, 3.0 + 1.0 / 3.0, delta=0.2)

    def test_reports_independent_of_workers(self):
        """Test byte-identical JSON and CSV for one and three workers."""
        settings = dict(n=40, replicas=12, master_seed=9, spikes=[{"theta": 2.0, "mult": 1, "frame": "uniform"}])
        one = run_experiment(make_config("outliers", workers=1, **settings))
        three = run_experiment(make_config("outliers", workers=3, **settings))

        self.assertEqual(one.to_json(), three.to_json())
        self.assertEqual(one.to_csv(), three.to_csv())

    def test_canonical_spike_uses_limit_draws(self):
        """Test that a localized frame is compared with draws of the Case A limit."""
        cfg = make_config("outliers", n=40, replicas=25, law={"kind": "rademacher"}, theory__draws=400,
                          spikes=[{"theta": 3.0, "frame": "canonical", "coefficients": [[0.6, 0.8]]}])
        report = run_experiment(cfg)
        target = report.targets["spike0"]

        self.assertEqual(target["case"], "A")
        self.assertEqual(target["source"], "limit-draws")
        self.assertEqual(target["draws"], 400)
        self.assertEqual(report.ks, [])

    def test_multiple_and_negative_spikes(self):
        """Test outlier numbering for a double spike and a negative spike."""
        cfg = make_config("outliers", n=60, replicas=20, theory__draws=300, spikes=[
            {"theta": 3.0, "mult": 2, "frame": "random-orthogonal", "seed": 5},
            {"theta": -2.5, "mult": 1, "frame": "uniform"},
        ])
        report = run_experiment(cfg)

        for name in ("spike0.s1", "spike0.s2", "spike0.gap", "spike1.lambda1"):
            self.assertIn(name, report.statistics)
        self.assertLess(report.statistics["spike1.lambda1"].mean, -2.0)
        self.assertGreater(report.statistics["spike0.gap"].min, 0.0)
        self.assertIn("spike0.gap", report.extras)

    def test_skewed_law_shift(self):
        """Test the third-moment shift of s and lambda under a skewed Bernoulli law."""
        n = 60
        cfg = make_config("outliers", n=n, replicas=30, master_seed=6,
                          law={"kind": "standardized-bernoulli", "p": 0.2},
                          spikes=[{"theta": 2.0, "mult": 1, "frame": "uniform"}])
        report = run_experiment(cfg)
        target = report.targets["spike0"]

        # mu_3 = 1.5 and <u, M_3 u> / N = mu_3 (1 - 1/N) for the flat vector
        shift = 1.5 * (1.0 - 1.0 / n) / 4.0
        self.assertAlmostEqual(target["mean"][0], shift, places=10)
        self.assertAlmostEqual(target["rho"], 2.5)
        verdict = next(v for v in report.verdicts if v.name == "spike0.lambda1.mean")
        self.assertAlmostEqual(verdict.target, 2.5 + shift / (c_theta(2.0) * math.sqrt(n)), places=10)
        self.assertGreater(verdict.target - 2.5, 0.01)

    def test_nothing_to_measure(self):
        """Test that only sub-critical spikes is an error."""
        cfg = make_config("outliers", n=20, replicas=2, spikes=[{"theta": 0.5, "mult": 1, "frame": "uniform"}])
        with self.assertRaises(WignerSpikesError) as ctx:
            run_experiment(cfg)
        self.assertEqual(ctx.exception.code, "nothing-to-measure")


class TestXiProxyExperiment(unittest.TestCase):
    """Test the Xi proxy experiment."""

    def test_null_matrix_closed_form(self):
        """Test the deterministic residual when X_N = 0."""
        cfg = make_config("xi-proxy", n_ladder=[50, 100, 200], null_matrix=True,
                          spikes=[{"theta": 2.0, "mult": 1, "frame": "uniform"}])
        report = run_experiment(cfg)

        self.assertTrue(report.passed)
        medians = report.extras["spike0.median_residual"]
        for n in (50, 100, 200):
            self.assertAlmostEqual(medians[str(n)], null_residual(2.0, 1.0, n), places=8)
        self.assertAlmostEqual(null_residual(2.0, 1.0, 100), 10.0 * 0.5 * 0.4)

    def test_random_ladder(self):
        """Test residual statistics for every rung and the decreasing-median verdict."""
        cfg = make_config("xi-proxy", n_ladder=[30, 60], replicas=6,
                          spikes=[{"theta": 3.0, "mult": 2, "frame": "fourier"}])
        report = run_experiment(cfg)

        self.assertIn("n30.spike0.residual", report.statistics)
        self.assertIn("n60.spike0.residual", report.statistics)
        self.assertEqual(report.replicas, 12)
        names = [v.name for v in report.verdicts]
        self.assertIn("spike0.median_residual.decreasing", names)
        self.assertIn("skip_rate", names)


class TestResolventExperiment(unittest.TestCase):
    """Test the resolvent experiment."""

    def test_forms_and_covariances(self):
        """Test recorded forms, real-z imaginary parts and covariance targets."""
        cfg = make_config("resolvent", n=60, replicas=40, z_points=[[3.0, 0.5]], include_outlier_points=True,
                          spikes=[{"theta": 2.0, "mult": 2, "frame": "fourier"}])
        report = run_experiment(cfg)

        self.assertEqual(report.extras["z_points"], [[3.0, 0.5], [2.5, 0.0]])
        for key in ("z0.l0p0.re", "z0.l0p1.im", "z1.l1p1.re"):
            self.assertIn(key, report.statistics)
        # beta=1 forms are real at real z
        self.assertEqual(report.statistics["z1.l0p1.im"].max, 0.0)
        self.assertEqual(np.asarray(report.targets["z0z1.l0p1.covariance"]).shape, (2, 2))
        self.assertAlmostEqual(report.targets["z1.l0p0.mean"][0], 0.5)
        self.assertTrue(report.ks)
        self.assertTrue(all(row["count"] == 40 for row in report.ks))

    def test_skewed_law_centering(self):
        """Test that a flat vector picks up the g^4 M_3 / sqrt(N) centering under a skewed law."""
        n = 60
        cfg = make_config("resolvent", n=n, replicas=30, z_points=[[3.0, 0.5]], include_outlier_points=False,
                          law={"kind": "standardized-bernoulli", "p": 0.2},
                          spikes=[{"theta": 3.0, "mult": 1, "frame": "uniform"},
                                  {"theta": 2.0, "mult": 1, "frame": "random-orthogonal", "seed": 5}])
        report = run_experiment(cfg)

        g = stieltjes_g(complex(3.0, 0.5)).g
        expected = g + g ** 4 * 1.5 * (1.0 - 1.0 / n) / math.sqrt(n)
        flat = complex(*report.targets["z0.l0p0.mean"])
        self.assertAlmostEqual(flat, expected, places=10)
        self.assertGreater(abs(flat - g), 1e-3)
        # the random vector is orthogonal to the flat one, so its sum vanishes
        np.testing.assert_allclose(report.targets["z0.l0p1.mean"], [0.0, 0.0], atol=1e-12)
        self.assertIn("z0.l1p1.re", report.statistics)

    def test_needs_two_vectors(self):
        """Test that a single delocalized vector is not enough."""
        cfg = make_config("resolvent", n=20, replicas=2, z_points=[[3.0, 0.0]])
        with self.assertRaises(WignerSpikesError) as ctx:
            run_experiment(cfg)
        self.assertEqual(ctx.exception.code, "nothing-to-measure")

    def test_branch_cut_rejected(self):
        """Test that z on the cut is a configuration error."""
        with self.assertRaises(WignerSpikesError) as ctx:
            make_config("resolvent", z_points=[[0.5, 0.0]])
        self.assertEqual(ctx.exception.code, "on-branch-cut")


class TestTestFunctionExperiment(unittest.TestCase):
    """Test the test-function experiment."""

    def test_linear_real(self):
        """Test statistics and variance targets for f(x) = x, beta = 1."""
        cfg = make_config("testfn", n=60, replicas=30, spikes=[{"theta": 2.0, "mult": 2, "frame": "fourier"}])
        report = run_experiment(cfg)

        for key in ("l0p0.re", "l0p1.re", "l1p1.re", "l0p0.re.scaled"):
            self.assertIn(key, report.statistics)
        self.assertNotIn("l0p1.im", report.statistics)
        self.assertAlmostEqual(report.targets["l0p0"]["variance"], 2.0, places=8)
        self.assertAlmostEqual(report.targets["l0p1"]["variance"], 1.0, places=8)
        self.assertAlmostEqual(report.targets["l0p0"]["mean"], 0.0, places=8)
        self.assertEqual(len(report.ks), 3)

    def test_complex_off_diagonal(self):
        """Test that beta = 2 adds the imaginary part for l != p only."""
        cfg = make_config("testfn", n=40, replicas=20, beta=2,
                          test_function={"f": "poly", "coeffs": [0.0, 0.0, 1.0]},
                          spikes=[{"theta": 2.0, "mult": 2, "frame": "fourier"}])
        report = run_experiment(cfg)

        self.assertIn("l0p1.im", report.statistics)
        self.assertNotIn("l0p0.im", report.statistics)
        self.assertAlmostEqual(report.targets["l0p1"]["variance"], 0.5, places=8)
        self.assertAlmostEqual(report.targets["l0p0"]["mean"], 1.0, places=8)

    def test_fixed_quadrature(self):
        """Test that an explicit node count is used for the targets."""
        cfg = make_config("testfn", n=40, replicas=20, theory__quadrature_nodes=64,
                          test_function={"f": "cos", "freq": 1.0},
                          spikes=[{"theta": 2.0, "mult": 1, "frame": "uniform"}])
        report = run_experiment(cfg)
        self.assertIn("l0p0", report.targets)


class TestSteinitzDemo(unittest.TestCase):
    """Test the Steinitz demo."""

    def test_bound_holds(self):
        """Test that every rearranged family meets the k^2 * c bound."""
        cfg = make_config("steinitz-demo", n=40, replicas=3, steinitz_k=2)
        report = run_experiment(cfg)

        self.assertTrue(report.passed)
        self.assertEqual(report.targets["constant"], 4)
        self.assertLessEqual(report.statistics["ratio"].max, 4.0)
        self.assertEqual(report.statistics["satisfied"].min, 1.0)


if __name__ == '__main__':
    import logging
    logging.basicConfig(level=logging.DEBUG)
    unittest.main()
