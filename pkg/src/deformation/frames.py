"""
Spike specifications, eigenvector frames and the factored perturbation A_N.

A_N = sum_j theta_j U_j U_j^* is never stored densely: callers keep the
spike spec plus one orthonormal frame U_j (N x k_j) per spike.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import WignerSpikesError
from src.utils.rng import stream

logger = logging.getLogger(__name__)

FRAME_KINDS = ("canonical", "uniform", "fourier", "random-orthogonal")

GRAM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Spike:
    """One eigenvalue theta of A_N with multiplicity and eigenvector frame kind.

    Args:
        theta: Nonzero spike eigenvalue
        mult: Multiplicity k_j
        frame: One of ``FRAME_KINDS``
        coefficients: Canonical frames only, k_j columns of K_j coefficients
            each; empty selects the first k_j canonical basis vectors
        seed: Random-orthogonal frames only
    """

    theta: float
    mult: int = 1
    frame: str = "uniform"
    coefficients: Tuple[Tuple[float, ...], ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.theta == 0 or not math.isfinite(self.theta):
            raise WignerSpikesError("invalid-spike", f"spike eigenvalue must be finite and nonzero, got {self.theta}")
        if self.mult < 1:
            raise WignerSpikesError("invalid-spike", f"multiplicity must be positive, got {self.mult}")
        if self.frame not in FRAME_KINDS:
            raise WignerSpikesError("invalid-spike", f"unknown frame kind '{self.frame}'")
        if self.coefficients:
            if self.frame != "canonical":
                raise WignerSpikesError("frame-kind-mismatch", "coefficients are only used by canonical frames")
            if len(self.coefficients) != self.mult:
                raise WignerSpikesError(
                    "frame-kind-mismatch",
                    f"canonical frame needs {self.mult} coefficient columns, got {len(self.coefficients)}",
                )
            if len({len(c) for c in self.coefficients}) != 1:
                raise WignerSpikesError("invalid-frame", "canonical coefficient columns differ in length")

    @property
    def support_size(self) -> int:
        """K_j, the number of canonical coordinates a canonical frame uses"""
        if self.coefficients:
            return len(self.coefficients[0])
        return self.mult

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Spike":
        """Parse {"theta": 2.0, "mult": 1, "frame": "uniform"}"""
        allowed = {"theta", "mult", "frame", "coefficients", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise WignerSpikesError("invalid-config", f"unknown spike keys: {sorted(unknown)}")
        if "theta" not in data:
            raise WignerSpikesError("invalid-config", "spike entry needs 'theta'")
        coefficients = tuple(tuple(float(c) for c in col) for col in data.get("coefficients", ()))
        return cls(
            theta=float(data["theta"]),
            mult=int(data.get("mult", 1)),
            frame=str(data.get("frame", "uniform")),
            coefficients=coefficients,
            seed=int(data.get("seed", 0)),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"theta": self.theta, "mult": self.mult, "frame": self.frame}
        if self.coefficients:
            data["coefficients"] = [list(col) for col in self.coefficients]
        if self.frame == "random-orthogonal":
            data["seed"] = self.seed
        return data


@dataclass(frozen=True)
class SpikeSpec:
    """Ordered spikes theta_1 > ... > theta_J of the perturbation"""

    spikes: Tuple[Spike, ...] = ()

    def __post_init__(self):
        thetas = [s.theta for s in self.spikes]
        if any(a <= b for a, b in zip(thetas, thetas[1:])):
            raise WignerSpikesError("invalid-spike", f"spike eigenvalues must be strictly decreasing, got {thetas}")

    @classmethod
    def from_list(cls, items: Sequence[Dict[str, Any]]) -> "SpikeSpec":
        return cls(spikes=tuple(Spike.from_dict(item) for item in items))

    def to_list(self) -> List[Dict[str, Any]]:
        return [s.to_dict() for s in self.spikes]

    @property
    def thetas(self) -> List[float]:
        return [s.theta for s in self.spikes]

    @property
    def mults(self) -> List[int]:
        return [s.mult for s in self.spikes]

    @property
    def rank(self) -> int:
        return sum(self.mults)

    def __len__(self) -> int:
        return len(self.spikes)


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal columns u^1..u^k spanning one spike's eigenspace"""

    columns: np.ndarray
    kind: str = "random-orthogonal"
    infinity_norm: float = field(init=False)

    def __post_init__(self):
        columns = np.array(self.columns, copy=True)
        object.__setattr__(self, "columns", columns)
        if columns.ndim != 2 or columns.shape[1] > columns.shape[0]:
            raise WignerSpikesError("invalid-frame", f"frame columns must be N x k with k <= N, got {columns.shape}")
        gram = columns.conj().T @ columns
        deviation = float(np.max(np.abs(gram - np.eye(columns.shape[1])))) if columns.size else 0.0
        if deviation > GRAM_TOLERANCE:
            raise WignerSpikesError("invalid-frame", f"frame columns not orthonormal (Gram deviation {deviation:.3e})")
        columns.setflags(write=False)
        object.__setattr__(self, "infinity_norm", float(np.max(np.abs(columns))) if columns.size else 0.0)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    def column(self, index: int) -> np.ndarray:
        return self.columns[:, index]


def _orthonormalize(block: np.ndarray, against: Optional[np.ndarray] = None, passes: int = 2) -> np.ndarray:
    """Modified Gram-Schmidt with re-orthogonalization against earlier columns"""
    q = np.array(block, dtype=block.dtype)
    for j in range(q.shape[1]):
        v = q[:, j]
        for _ in range(passes):
            if against is not None and against.shape[1]:
                for i in range(against.shape[1]):
                    v = v - np.vdot(against[:, i], v) * against[:, i]
            for i in range(j):
                v = v - np.vdot(q[:, i], v) * q[:, i]
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            raise WignerSpikesError("invalid-frame", "random columns are numerically dependent")
        q[:, j] = v / norm
    return q


class FrameBuilder:
    """Builds the frames of all spikes jointly so they are mutually orthogonal.

    Canonical spikes take consecutive coordinate blocks, Fourier spikes take
    consecutive frequencies starting at 1 and random-orthogonal spikes are
    orthogonalized against every deterministic column.
    """

    def __init__(self, spec: SpikeSpec, n: int):
        if n < 1:
            raise WignerSpikesError("invalid-dimension", f"n must be positive, got {n}")
        if spec.rank > n:
            raise WignerSpikesError("invalid-dimension", f"total rank {spec.rank} exceeds n={n}")
        self.spec = spec
        self.n = n

    def _deterministic(self, spike: Spike, offset: int, frequency: int) -> np.ndarray:
        n, k = self.n, spike.mult
        if spike.frame == "uniform":
            if k != 1:
                raise WignerSpikesError("frame-kind-mismatch", f"uniform frame supports k=1 only, got k={k}")
            return np.full((n, 1), 1.0 / math.sqrt(n))
        if spike.frame == "canonical":
            support = spike.support_size
            if offset + support > n:
                raise WignerSpikesError(
                    "invalid-dimension",
                    f"canonical block {offset}..{offset + support} does not fit n={n}",
                )
            columns = np.zeros((n, k))
            if spike.coefficients:
                columns[offset:offset + support, :] = np.array(spike.coefficients).T
            else:
                columns[offset:offset + k, :] = np.eye(k)
            return columns
        # fourier: cos/sin pairs at consecutive frequencies
        last = frequency + (k - 1) // 2
        if 2 * last >= n:
            raise WignerSpikesError("invalid-dimension", f"Fourier frequency {last} needs n > {2 * last}")
        grid = np.arange(n)
        columns = np.empty((n, k))
        for c in range(k):
            f = frequency + c // 2
            wave = np.cos if c % 2 == 0 else np.sin
            columns[:, c] = math.sqrt(2.0 / n) * wave(2.0 * math.pi * f * grid / n)
        return columns

    def build(self) -> List[Frame]:
        built: Dict[int, np.ndarray] = {}
        offset, frequency = 0, 1
        for index, spike in enumerate(self.spec.spikes):
            if spike.mult > self.n:
                raise WignerSpikesError("invalid-dimension", f"multiplicity {spike.mult} exceeds n={self.n}")
            if spike.frame == "random-orthogonal":
                continue
            built[index] = self._deterministic(spike, offset, frequency)
            if spike.frame == "canonical":
                offset += spike.support_size
            elif spike.frame == "fourier":
                frequency += (spike.mult + 1) // 2

        for index, spike in enumerate(self.spec.spikes):
            if spike.frame != "random-orthogonal":
                continue
            previous = [built[i] for i in sorted(built)]
            against = np.hstack(previous) if previous else None
            draws = stream(spike.seed, index).standard_normal((self.n, spike.mult))
            built[index] = _orthonormalize(draws, against)

        frames = [Frame(columns=built[i], kind=s.frame) for i, s in enumerate(self.spec.spikes)]
        check_joint_orthogonality(frames)
        return frames


def check_joint_orthogonality(frames: Sequence[Frame]) -> float:
    """Raise unless the stacked columns of all frames are orthonormal"""
    if not frames:
        return 0.0
    stacked = np.hstack([f.columns for f in frames])
    gram = stacked.conj().T @ stacked
    deviation = float(np.max(np.abs(gram - np.eye(stacked.shape[1]))))
    if deviation > GRAM_TOLERANCE:
        kinds = [f.kind for f in frames]
        raise WignerSpikesError(
            "non-orthogonal-frames",
            f"frames {kinds} are not jointly orthogonal (Gram deviation {deviation:.3e})",
        )
    return deviation


def build_frames(spec: SpikeSpec, n: int) -> List[Frame]:
    """Frames of every spike, built jointly"""
    frames = FrameBuilder(spec, n).build()
    logger.debug(f"Built {len(frames)} frames for n={n}")
    return frames


def build_frame(spec: SpikeSpec, spike_index: int, n: int) -> Frame:
    """Frame of one spike as it appears in the joint construction"""
    if not 0 <= spike_index < len(spec):
        raise WignerSpikesError("invalid-spike", f"spike index {spike_index} out of range")
    spike = spec.spikes[spike_index]
    if spike.frame == "uniform" and spike.mult > 1:
        raise WignerSpikesError("frame-kind-mismatch", f"uniform frame supports k=1 only, got k={spike.mult}")
    if spike.mult > n:
        raise WignerSpikesError("invalid-dimension", f"multiplicity {spike.mult} exceeds n={n}")
    return build_frames(spec, n)[spike_index]


def apply_perturbation(spec: SpikeSpec, frames: Sequence[Frame], x: np.ndarray) -> np.ndarray:
    """A_N x = sum_j theta_j U_j (U_j^* x) without forming A_N.

    ``x`` may be a vector or an N x m block of vectors.
    """
    x = np.asarray(x)
    if len(frames) != len(spec):
        raise WignerSpikesError("invalid-dimension", f"{len(spec)} spikes but {len(frames)} frames")
    if not frames:
        return np.zeros_like(x)
    n = frames[0].n
    if x.shape[0] != n:
        raise WignerSpikesError("invalid-dimension", f"vector length {x.shape[0]} does not match n={n}")
    result = None
    for spike, frame in zip(spec.spikes, frames):
        if frame.n != n:
            raise WignerSpikesError("invalid-dimension", "frames have different lengths")
        term = spike.theta * (frame.columns @ (frame.columns.conj().T @ x))
        result = term if result is None else result + term
    return result


def dense_perturbation(spec: SpikeSpec, frames: Sequence[Frame]) -> np.ndarray:
    """Materialized A_N; used only where a dense oracle is needed"""
    if not frames:
        raise WignerSpikesError("invalid-dimension", "no frames to materialize")
    return apply_perturbation(spec, frames, np.eye(frames[0].n))
