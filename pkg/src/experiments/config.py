"""
Typed experiment configuration built from the merged settings dictionary.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from src.deformation.frames import SpikeSpec
from src.ensemble.entry_laws import EntryLaw
from src.spectral.eigensolver import SOLVER_METHODS
from src.theory.quadrature import TestFunction
from src.theory.semicircle import on_branch_cut
from src.utils.errors import ConfigError, WignerSpikesError

logger = logging.getLogger(__name__)

EXPERIMENTS = ("outliers", "xi-proxy", "resolvent", "testfn", "steinitz-demo")
MEAN_CORRECTIONS = ("corrected", "printed")


@dataclass(frozen=True)
class Tolerances:
    """Absolute and relative tolerances used by verdicts"""

    mean_abs: float = 0.01
    s_mean_abs: float = 0.0
    variance_rel: float = 0.15
    variance_abs: float = 1e-9
    ks_p: float = 0.01
    centering_abs: float = 0.002
    covariance_abs: float = 0.05
    testfn_mean_abs: float = 0.002
    skip_rate: float = 0.01

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Tolerances":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(unknown)}")
        return cls(**{key: float(value) for key, value in data.items()})


def parse_complex(value: Any) -> complex:
    """Accept [re, im] pairs, plain numbers or strings such as '3+0.5j'"""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ConfigError(f"cannot read a complex number from {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an experiment needs; identical configs give identical reports."""

    experiment: str
    law: EntryLaw
    n: int
    replicas: int
    spikes: SpikeSpec
    master_seed: int
    beta: int = 1
    workers: int = 1
    n_ladder: Tuple[int, ...] = ()
    z_points: Tuple[complex, ...] = ()
    include_outlier_points: bool = False
    test_function: TestFunction = field(default_factory=TestFunction)
    mean_correction: str = "corrected"
    truncate: bool = False
    null_matrix: bool = False
    steinitz_k: int = 2
    solver: str = "lapack"
    quadrature_nodes: int = 0
    theory_draws: int = 20000
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: Optional[str] = None
    source: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{self.experiment}'")
        if self.replicas < 1:
            raise ConfigError(f"replicas must be at least 1, got {self.replicas}")
        if self.n < 2:
            raise WignerSpikesError("invalid-dimension", f"n must be at least 2, got {self.n}")
        if any(size < 2 for size in self.n_ladder):
            raise WignerSpikesError("invalid-dimension", f"every ladder size must be at least 2: {list(self.n_ladder)}")
        if self.beta not in (1, 2):
            raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {self.beta}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if self.master_seed < 0:
            raise WignerSpikesError("invalid-parameter", f"master_seed must be non-negative, got {self.master_seed}")
        if self.solver not in SOLVER_METHODS:
            raise ConfigError(f"spectral.method must be one of {SOLVER_METHODS}, got '{self.solver}'")
        if self.mean_correction not in MEAN_CORRECTIONS:
            raise ConfigError(f"mean_correction must be one of {MEAN_CORRECTIONS}, got '{self.mean_correction}'")
        if self.steinitz_k < 1:
            raise ConfigError(f"steinitz_k must be at least 1, got {self.steinitz_k}")
        for z in self.z_points:
            if on_branch_cut(z, self.law.sigma):
                raise WignerSpikesError("on-branch-cut", f"z={z} lies on [-2 sigma, 2 sigma]")

    @property
    def sigma(self) -> float:
        return self.law.sigma

    @property
    def ladder(self) -> List[int]:
        """Matrix sizes to run; a single ``n`` when no ladder is configured"""
        return list(self.n_ladder) if self.n_ladder else [self.n]

    @classmethod
    def from_dict(cls, settings: Dict[str, Any]) -> "ExperimentConfig":
        """Build from a merged settings dictionary (see ``ConfigManager``)"""
        try:
            spectral = settings.get("spectral", {})
            theory = settings.get("theory", {})
            return cls(
                experiment=settings["experiment"],
                law=EntryLaw.from_dict(settings["law"]),
                n=int(settings["n"]),
                replicas=int(settings["replicas"]),
                spikes=SpikeSpec.from_list(settings.get("spikes", [])),
                master_seed=int(settings["master_seed"]),
                beta=int(settings.get("beta", 1)),
                workers=int(settings.get("workers", 1)),
                n_ladder=tuple(int(size) for size in settings.get("n_ladder", [])),
                z_points=tuple(parse_complex(z) for z in settings.get("z_points", [])),
                include_outlier_points=bool(settings.get("include_outlier_points", False)),
                test_function=TestFunction.from_dict(settings.get("test_function", {})),
                mean_correction=settings.get("mean_correction", "corrected"),
                truncate=bool(settings.get("truncate", False)),
                null_matrix=bool(settings.get("null_matrix", False)),
                steinitz_k=int(settings.get("steinitz_k", 2)),
                solver=spectral.get("method", "lapack"),
                quadrature_nodes=int(theory.get("quadrature_nodes", 0)),
                theory_draws=int(theory.get("draws", 20000)),
                tolerances=Tolerances.from_dict(settings.get("tolerances", {})),
                output_dir=settings.get("output_dir"),
                source=settings,
            )
        except KeyError as e:
            raise ConfigError(f"missing required key {e}")
        except (TypeError, ValueError) as e:
            if isinstance(e, WignerSpikesError):
                raise
            raise ConfigError(f"bad value in configuration: {e}")

    def echo(self) -> Dict[str, Any]:
        """Canonical configuration echo written into reports"""
        return {
            "experiment": self.experiment,
            "law": self.law.to_dict(),
            "n": self.n,
            "n_ladder": list(self.n_ladder),
            "beta": self.beta,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
            "spikes": self.spikes.to_list(),
            "z_points": [[z.real, z.imag] for z in self.z_points],
            "include_outlier_points": self.include_outlier_points,
            "test_function": self.test_function.to_dict(),
            "mean_correction": self.mean_correction,
            "truncate": self.truncate,
            "null_matrix": self.null_matrix,
            "steinitz_k": self.steinitz_k,
            "spectral": {"method": self.solver},
            "theory": {"quadrature_nodes": self.quadrature_nodes, "draws": self.theory_draws},
            "tolerances": dict(self.tolerances.__dict__),
        }
