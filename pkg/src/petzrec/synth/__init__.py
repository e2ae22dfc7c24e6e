"""Circuit synthesis for dilation unitaries."""
from .gates import (
    CNOT,
    CZ,
    GPG,
    RX,
    RY,
    RZ,
    Gate,
    GateSequence,
    embed,
    raw_unitary,
    sequence_unitary,
    verify_equiv,
)
from .qsd import decompose_3q
from .rewrite import rewrite_cnot_to_gpg
from .twoq import canonical_coordinates, decompose_su4, merge_single_qubit_runs


def synthesize(u) -> GateSequence:
    """Dispatch on size: 2x2, 4x4 or 8x8."""
    import numpy as np

    from .twoq import single_qubit_gates

    n = np.asarray(u).shape[0]
    if n == 2:
        return GateSequence(1, single_qubit_gates(np.asarray(u, dtype=complex), 0))
    if n == 4:
        return decompose_su4(u)
    if n == 8:
        return decompose_3q(u)
    raise ValueError(f"no synthesis for dimension {n}")


__all__ = [
    "CNOT", "CZ", "GPG", "RX", "RY", "RZ", "Gate", "GateSequence", "embed",
    "raw_unitary", "sequence_unitary", "verify_equiv", "decompose_3q",
    "rewrite_cnot_to_gpg", "canonical_coordinates", "decompose_su4",
    "merge_single_qubit_runs", "synthesize",
]
