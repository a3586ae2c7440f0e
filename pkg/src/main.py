#!/usr/bin/env python3
"""
wignerspikes command-line entry point

Subcommands run one experiment each (outliers, xi-proxy, resolvent, testfn,
steinitz-demo) or print closed-form predictions (theory-table). Exit codes:
0 when every verdict passes, 1 when a verdict fails, 2 on configuration or
runtime errors.
"""

import sys
import os
import argparse
import json
import logging
from pathlib import Path
from typing import List, Optional

# Add parent directory to path for imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from src.version import __version__
from src.utils.config import ConfigManager, get_app_data_dir, get_default_output_dir
from src.utils.errors import WignerSpikesError

logger = logging.getLogger(__name__)

EXPERIMENT_COMMANDS = ("outliers", "xi-proxy", "resolvent", "testfn", "steinitz-demo")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# CLI flag -> configuration key
FLAG_KEYS = (
    ("n", "n"),
    ("replicas", "replicas"),
    ("master_seed", "master_seed"),
    ("beta", "beta"),
    ("workers", "workers"),
    ("k", "steinitz_k"),
    ("pairs", "replicas"),
    ("seed", "master_seed"),
)


def initialize_application(log_level: str = "INFO") -> Path:
    """Initialize application directories and logging"""
    # Get app data directory using centralized function
    app_data_dir = get_app_data_dir()

    # Create logs directory
    logs_dir = app_data_dir / 'logs'
    logs_dir.mkdir(parents=True, exist_ok=True)

    # Setup basic logging
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(logs_dir / 'wignerspikes.log', encoding='utf-8'),
            logging.StreamHandler()
        ],
        force=True
    )

    logger.info(f"wignerspikes {__version__} initialized")
    logger.debug(f"Application data directory: {app_data_dir}")
    return app_data_dir


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment plus theory-table"""
    parser = argparse.ArgumentParser(
        prog="wignerspikes",
        description="Monte Carlo experiments on outliers of spiked Wigner matrices",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")

    logging_parent = argparse.ArgumentParser(add_help=False)
    logging_parent.add_argument('--log-level', default='INFO', choices=LOG_LEVELS, type=str.upper)

    common = argparse.ArgumentParser(add_help=False, parents=[logging_parent])
    common.add_argument('--config', type=Path, help="JSON experiment configuration")
    common.add_argument('--output-dir', type=Path, help="report directory (default $WIGNERSPIKES_OUTPUT_DIR)")
    common.add_argument('--workers', type=int, help="maximum number of parallel replicas")
    common.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                        help="override a configuration key (dot notation, repeatable)")
    common.add_argument('--n', type=int, help="matrix dimension")
    common.add_argument('--replicas', type=int, help="number of Monte Carlo replicas")
    common.add_argument('--master-seed', type=int, help="root seed of all replica streams")
    common.add_argument('--beta', type=int, choices=(1, 2), help="1 real symmetric, 2 complex Hermitian")

    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')
    commands.add_parser('outliers', parents=[common], help="outlier locations and fluctuation laws")
    commands.add_parser('xi-proxy', parents=[common], help="Xi-matrix residual over an N ladder")
    commands.add_parser('resolvent', parents=[common], help="resolvent centering and covariance")
    commands.add_parser('testfn', parents=[common], help="test-function CLT for <u, f(X) v>")

    steinitz = commands.add_parser('steinitz-demo', parents=[common], help="Steinitz rearrangement of frame families")
    steinitz.add_argument('--k', type=int, help="frame width")
    steinitz.add_argument('--pairs', type=int, help="number of random frames")
    steinitz.add_argument('--seed', type=int, help="root seed")

    table = commands.add_parser('theory-table', parents=[logging_parent], help="closed-form predictions for one spike")
    table.add_argument('--theta', type=float, required=True)
    table.add_argument('--sigma', type=float, default=1.0)
    table.add_argument('--beta', type=int, choices=(1, 2), default=1)
    table.add_argument('--json', action='store_true', help="print JSON instead of a table")
    return parser


def theory_table(theta: float, sigma: float = 1.0, beta: int = 1) -> dict:
    """Closed-form quantities for one super-critical spike"""
    from src.theory.semicircle import (
        c_theta, gaussian_entry_variance, neg_inv_gprime, outlier_location, pi_cov, require_supercritical,
    )

    require_supercritical(theta, sigma)
    rho = outlier_location(theta, sigma)
    variance = gaussian_entry_variance(theta, sigma)
    return {
        "theta": theta,
        "sigma": sigma,
        "beta": beta,
        "rho": rho,
        "c_theta": c_theta(theta, sigma),
        "neg_inv_gprime": neg_inv_gprime(theta, sigma),
        "gaussian_entry_variance": variance,
        "outlier_variance": (2.0 / beta) * variance,
        "pi_rho_rho": pi_cov(rho, rho, sigma).real,
    }


def _apply_flags(manager: ConfigManager, args: argparse.Namespace) -> None:
    for attribute, key in FLAG_KEYS:
        value = getattr(args, attribute, None)
        if value is not None:
            manager.set(key, value)


def dispatch(args: argparse.Namespace) -> int:
    """Run the parsed invocation and return its exit code"""
    if args.command == 'theory-table':
        table = theory_table(args.theta, args.sigma, args.beta)
        if args.json:
            print(json.dumps(table, indent=2))
        else:
            for key, value in table.items():
                print(f"{key:<24} {value:.12g}" if isinstance(value, float) else f"{key:<24} {value}")
        return 0

    from src.experiments import run_experiment

    manager = ConfigManager(args.config, experiment=args.command)
    manager.apply_overrides(args.overrides)
    _apply_flags(manager, args)
    cfg = manager.to_experiment_config()

    report = run_experiment(cfg)
    output_dir = args.output_dir or (Path(cfg.output_dir) if cfg.output_dir else get_default_output_dir())
    paths = report.write(output_dir)

    for verdict in report.failed_verdicts:
        logger.warning(f"Verdict failed: {verdict.name} empirical={verdict.empirical} target={verdict.target}")
    passed = len(report.verdicts) - len(report.failed_verdicts)
    print(f"{report.experiment}: {passed}/{len(report.verdicts)} verdicts passed, "
          f"{report.skipped_replicas} skipped; report {paths['json']}")
    return 0 if report.passed else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    # Initialize application environment
    initialize_application(args.log_level)

    try:
        return dispatch(args)
    except WignerSpikesError as e:
        logger.error(f"{e}")
        return 2
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Runtime error: {e}")
        return 2
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
