"""
Tests for configuration management, version migration and app data paths.

Tests the centralized app data directory function, version comparison logic,
settings migration and the strict handling of unknown keys and overrides.
"""

import unittest
import sys
import os
import tempfile
import shutil
import json
from pathlib import Path
from unittest.mock import patch

# Add project root to path for testing
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.utils.config import (
    ConfigManager,
    get_app_data_dir,
    get_default_output_dir,
    load_experiment_config,
    parse_override_value,
)
from src.utils.errors import ConfigError
from packaging import version as pkg_version

CONFIG_DIR = Path(__file__).parent.parent / 'config'


def write_config(directory: str, data: dict, name: str = 'experiment.json') -> Path:
    path = Path(directory) / name
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f)
    return path


class TestGetAppDataDir(unittest.TestCase):
    """Test the centralized get_app_data_dir function."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_environment_override(self):
        """Test that $WIGNERSPIKES_HOME selects and creates the directory."""
        target = Path(self.temp_dir) / 'home'
        with patch.dict(os.environ, {'WIGNERSPIKES_HOME': str(target)}):
            result = get_app_data_dir()
        self.assertEqual(result, target)
        self.assertTrue(result.is_dir())

    def test_default_under_home(self):
        """Test the ~/.wignerspikes fallback."""
        environ = {k: v for k, v in os.environ.items() if k != 'WIGNERSPIKES_HOME'}
        with patch.dict(os.environ, environ, clear=True), \
                patch('pathlib.Path.home', return_value=Path(self.temp_dir)):
            result = get_app_data_dir()
        self.assertEqual(result, Path(self.temp_dir) / '.wignerspikes')
        self.assertTrue(result.exists())

    def test_default_output_dir(self):
        """Test report directory resolution from the environment and the app dir."""
        with patch.dict(os.environ, {'WIGNERSPIKES_OUTPUT_DIR': str(Path(self.temp_dir) / 'out')}):
            self.assertEqual(get_default_output_dir(), Path(self.temp_dir) / 'out')

        environ = {k: v for k, v in os.environ.items() if k != 'WIGNERSPIKES_OUTPUT_DIR'}
        environ['WIGNERSPIKES_HOME'] = self.temp_dir
        with patch.dict(os.environ, environ, clear=True):
            self.assertEqual(get_default_output_dir(), Path(self.temp_dir) / 'reports')


class TestVersionComparison(unittest.TestCase):
    """Test that version comparison uses semantic versioning correctly."""

    def test_semantic_version_comparison_double_digits(self):
        """Test version comparison with double-digit minor/patch versions."""
        # This is the critical test - string comparison would fail here
        self.assertTrue(pkg_version.parse("1.9.0") < pkg_version.parse("1.10.0"))
        self.assertTrue(pkg_version.parse("1.10.0") > pkg_version.parse("1.2.0"))
        self.assertTrue(pkg_version.parse("1.0.9") < pkg_version.parse("1.0.10"))

    def test_string_comparison_would_fail(self):
        """Demonstrate why string comparison fails for versions."""
        self.assertTrue("1.9.0" > "1.10.0")  # WRONG! Should be <
        self.assertTrue(pkg_version.parse("1.9.0") < pkg_version.parse("1.10.0"))


class TestConfigMigration(unittest.TestCase):
    """Test configuration migration functionality."""

    def setUp(self):
        """Create temporary directory for test config files."""
        self.temp_dir = tempfile.mkdtemp()
        self.manager = ConfigManager()

    def tearDown(self):
        """Clean up temporary directory."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_migrate_from_1_0_0(self):
        """Test that 1.0.0 'seed' and 'spike' become 'master_seed' and 'spikes'."""
        old_settings = {"version": "1.0.0", "seed": 5, "spike": {"theta": 3.0}}

        migrated = self.manager._migrate_settings(old_settings, "1.0.0")

        self.assertEqual(migrated['master_seed'], 5)
        self.assertEqual(migrated['spikes'], [{"theta": 3.0}])
        self.assertNotIn('seed', migrated)
        self.assertNotIn('spike', migrated)
        self.assertEqual(migrated['version'], ConfigManager.CURRENT_VERSION)

    def test_migrate_does_not_modify_input(self):
        """Test that migration works on a copy."""
        old_settings = {"version": "1.0.0", "seed": 5}
        self.manager._migrate_settings(old_settings, "1.0.0")
        self.assertEqual(old_settings, {"version": "1.0.0", "seed": 5})

    def test_migrate_from_1_9_0(self):
        """Test that newer versions skip the pre-1.1.0 migration (double-digit handling)."""
        old_settings = {"version": "1.9.0", "seed": 5}

        migrated = self.manager._migrate_settings(old_settings, "1.9.0")

        self.assertEqual(migrated.get('seed'), 5)
        self.assertNotIn('master_seed', migrated)

    def test_migrate_handles_invalid_version(self):
        """Test that unparsable, None and empty versions are treated as 0.0.0."""
        for version in ("invalid", None, ""):
            with self.subTest(version=version):
                migrated = self.manager._migrate_settings({"seed": 9}, version)
                self.assertEqual(migrated['master_seed'], 9)

    def test_load_legacy_example(self):
        """Test loading the shipped 1.0.0 example file."""
        manager = ConfigManager(CONFIG_DIR / 'legacy_1_0_0.json')

        self.assertEqual(manager.get('master_seed'), 12)
        self.assertEqual(manager.get('spikes'), [{"theta": 2.5, "mult": 1, "frame": "uniform"}])
        self.assertEqual(manager.get('version'), ConfigManager.CURRENT_VERSION)


class TestConfigLoading(unittest.TestCase):
    """Test strict loading of configuration files."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_defaults_without_file(self):
        """Test that defaults alone build a valid experiment config."""
        cfg = ConfigManager().to_experiment_config()

        self.assertEqual(cfg.experiment, "outliers")
        self.assertEqual(cfg.n, 1000)
        self.assertEqual(cfg.spikes.thetas, [2.0])
        self.assertEqual(cfg.solver, "lapack")

    def test_file_merges_over_defaults(self):
        """Test that nested sections are merged, not replaced."""
        path = write_config(self.temp_dir, {"version": "1.1.0", "law": {"kind": "rademacher"}, "n": 300})

        manager = ConfigManager(path)

        self.assertEqual(manager.get('law.kind'), "rademacher")
        self.assertEqual(manager.get('law.sigma'), 1.0)
        self.assertEqual(manager.get('n'), 300)

    def test_unknown_key_rejected(self):
        """Test that unknown keys are never ignored."""
        path = write_config(self.temp_dir, {"version": "1.1.0", "tolerances": {"mean_absolute": 0.1}})

        with self.assertRaises(ConfigError) as ctx:
            ConfigManager(path)
        self.assertIn("tolerances.mean_absolute", str(ctx.exception))
        self.assertEqual(ctx.exception.code, "invalid-config")

    def test_type_mismatch_rejected(self):
        """Test that values are type-checked against the defaults."""
        for data in ({"n": "big"}, {"truncate": 1}, {"replicas": 2.5}, {"law": {"sigma": True}}):
            with self.subTest(data=data):
                path = write_config(self.temp_dir, dict(data, version="1.1.0"))
                with self.assertRaises(ConfigError):
                    ConfigManager(path)

    def test_int_accepted_for_float(self):
        """Test that an integer is accepted where a float is expected."""
        path = write_config(self.temp_dir, {"version": "1.1.0", "law": {"sigma": 2}})
        self.assertEqual(ConfigManager(path).to_experiment_config().sigma, 2.0)

    def test_missing_file_names_path(self):
        """Test that a missing file raises with the path in the message."""
        missing = Path(self.temp_dir) / 'nope.json'
        with self.assertRaises(ConfigError) as ctx:
            ConfigManager(missing)
        self.assertIn(str(missing), str(ctx.exception))

    def test_invalid_json(self):
        """Test that malformed JSON becomes a ConfigError."""
        path = Path(self.temp_dir) / 'broken.json'
        path.write_text('{"n": ', encoding='utf-8')
        with self.assertRaises(ConfigError):
            ConfigManager(path)

    def test_experiment_mismatch(self):
        """Test that a file for one experiment cannot run as another."""
        path = write_config(self.temp_dir, {"version": "1.1.0", "experiment": "outliers"})
        with self.assertRaises(ConfigError):
            ConfigManager(path, experiment="testfn")
        self.assertEqual(ConfigManager(path, experiment="outliers").get('experiment'), "outliers")

    def test_save_and_reload(self):
        """Test that a saved configuration loads back to the same settings."""
        manager = ConfigManager()
        manager.set('replicas', 17)
        saved = manager.save_settings(Path(self.temp_dir) / 'saved.json')

        self.assertEqual(ConfigManager(saved).settings, manager.settings)

    def test_shipped_examples_load(self):
        """Test that every example configuration converts to an ExperimentConfig."""
        for path in sorted(CONFIG_DIR.glob('*.json')):
            with self.subTest(path=path.name):
                cfg = ConfigManager(path).to_experiment_config()
                self.assertGreaterEqual(cfg.replicas, 1)


class TestOverrides(unittest.TestCase):
    """Test key=value overrides."""

    def setUp(self):
        self.manager = ConfigManager()

    def test_parse_override_value(self):
        """Test JSON literals with a plain-string fallback."""
        self.assertEqual(parse_override_value("500"), 500)
        self.assertEqual(parse_override_value("0.2"), 0.2)
        self.assertIs(parse_override_value("true"), True)
        self.assertEqual(parse_override_value("[[3, 0.5]]"), [[3, 0.5]])
        self.assertEqual(parse_override_value("rademacher"), "rademacher")

    def test_dot_notation(self):
        """Test overrides of top-level and nested keys."""
        self.manager.apply_overrides(["n=500", "law.kind=rademacher", "tolerances.variance_rel=0.2"])

        self.assertEqual(self.manager.get('n'), 500)
        self.assertEqual(self.manager.get('law.kind'), "rademacher")
        self.assertEqual(self.manager.get('tolerances.variance_rel'), 0.2)

    def test_list_override(self):
        """Test overriding the spike list with a JSON value."""
        self.manager.apply_overrides(['spikes=[{"theta": 3.0, "mult": 2, "frame": "fourier"}]'])
        cfg = self.manager.to_experiment_config()
        self.assertEqual(cfg.spikes.mults, [2])

    def test_section_override_merges(self):
        """Test that a dict value is merged over the section defaults."""
        self.manager.set('law', {"kind": "uniform"})
        self.assertEqual(self.manager.get('law.sigma'), 1.0)

    def test_bad_overrides(self):
        """Test that unknown keys, bad types and malformed items are rejected."""
        for item in ("foo=1", "law.shape=2", "n=abc", "n", "version=2.0.0", "n.value=3"):
            with self.subTest(item=item):
                with self.assertRaises(ConfigError):
                    self.manager.apply_overrides([item])

    def test_load_experiment_config(self):
        """Test the one-call helper."""
        cfg = load_experiment_config(experiment="testfn", overrides=["n=64", "replicas=3"])
        self.assertEqual((cfg.experiment, cfg.n, cfg.replicas), ("testfn", 64, 3))


if __name__ == '__main__':
    import logging
    logging.basicConfig(level=logging.DEBUG)
    unittest.main()
