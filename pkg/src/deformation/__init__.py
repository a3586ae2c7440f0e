"""
Finite-rank perturbations: spike specs, eigenvector frames, Steinitz rearrangement
"""

from src.deformation.frames import (
    FRAME_KINDS,
    Frame,
    FrameBuilder,
    Spike,
    SpikeSpec,
    apply_perturbation,
    build_frame,
    build_frames,
    check_joint_orthogonality,
    dense_perturbation,
)
from src.deformation.steinitz import SteinitzResult, steinitz_family, prefix_sup_norm, steinitz_permute

__all__ = [
    'FRAME_KINDS',
    'Frame',
    'FrameBuilder',
    'Spike',
    'SpikeSpec',
    'apply_perturbation',
    'build_frame',
    'build_frames',
    'check_joint_orthogonality',
    'dense_perturbation',
    'SteinitzResult',
    'steinitz_family',
    'prefix_sup_norm',
    'steinitz_permute',
]
