"""Exact Petz recovery maps for single-qubit channels, their circuits and ion-trap noise."""
from .channels import (
    ChannelKind,
    KrausChannel,
    make_amplitude_damping,
    make_channel,
    make_dephasing,
    make_depolarizing,
    make_erasure,
    validate,
)
from .dilation import DilationUnitary, apply_dilation, dilate_general, dilate_rank2_analytic
from .errors import PetzError
from .petz import BlochState, PetzMap, build_petz, recovery_error_deltaF, recovery_fidelity

__all__ = [
    "ChannelKind", "KrausChannel", "make_amplitude_damping", "make_channel",
    "make_dephasing", "make_depolarizing", "make_erasure", "validate",
    "DilationUnitary", "apply_dilation", "dilate_general", "dilate_rank2_analytic",
    "PetzError", "BlochState", "PetzMap", "build_petz", "recovery_error_deltaF",
    "recovery_fidelity",
]
