"""
Entry laws and Wigner matrix sampling
"""

from src.ensemble.entry_laws import LAW_KINDS, EntryLaw, MomentProfile, m3_quadform
from src.ensemble.wigner import WignerSample, WignerSampler, sample_wigner, truncate_center

__all__ = [
    'LAW_KINDS',
    'EntryLaw',
    'MomentProfile',
    'm3_quadform',
    'WignerSample',
    'WignerSampler',
    'sample_wigner',
    'truncate_center',
]
