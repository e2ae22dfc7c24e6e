import math

import numpy as np
import pytest

from petzrec import numerics as nx
from petzrec.synth import CNOT, RX, RY, RZ, Gate, GateSequence, raw_unitary

PI = math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bloch_vectors(rng, n):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.random((n, 1)) ** (1 / 3)


def bloch_from_vector(v):
    from petzrec.petz import density_to_bloch

    return density_to_bloch(0.5 * (np.eye(2) + sum(c * s for c, s in zip(v, nx.PAULIS))))


def choi_state(fn, d=2):
    """Normalized Choi state of a map given as a callable on d x d matrices."""
    j = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, k] = 1.0
            j += np.kron(e, fn(e))
    return j / d


def average_gate_infidelity(f1, f2, d=2):
    """``1 - (d F + 1)/(d + 1)`` with ``F`` the fidelity of the Choi states."""
    f = nx.uhlmann_fidelity(choi_state(f1, d), choi_state(f2, d))
    return 1.0 - (d * f + 1.0) / (d + 1.0)


def ancilla_circuit_channel(gs):
    """System map of a 2-qubit circuit with qubit 0 an ancilla prepared in |0>."""
    u = raw_unitary(gs)
    anc = np.diag([1.0, 0.0]).astype(complex)

    def f(rho):
        out = u @ np.kron(anc, rho) @ u.conj().T
        return nx.partial_trace(out, (2, 2), keep="B")

    return f


def negate_angles(gs):
    return GateSequence(gs.width, [Gate(g.name, g.qubits, None if g.angle is None else -g.angle) for g in gs])


# printed circuits; T = ancilla wire (qubit 0), B = system wire (qubit 1)
T, B = 0, 1

DEPHASING_FIGURE_CIRCUIT = GateSequence(2, [
    RZ(T, 3 * PI / 2), RY(T, PI / 2), RZ(T, 3.61),
    RZ(B, PI / 4), RY(B, PI / 2), RZ(B, 3 * PI / 2),
    CNOT(B, T),
    RX(B, 3 * PI / 2), RZ(T, 5.18),
    CNOT(B, T),
    RY(B, PI), RZ(B, 5 * PI / 4), RY(T, PI / 2), RZ(T, 3 * PI / 2),
])

AMPLITUDE_DAMPING_FIGURE_CIRCUIT = GateSequence(2, [
    RZ(T, PI / 4), RY(T, PI / 2), RZ(T, 3.49),
    RZ(B, PI / 4), RY(B, 1.04), RZ(B, PI / 2),
    CNOT(B, T),
    RX(B, 5.11), RZ(T, 5.60), RZ(B, 3 * PI / 2), RX(T, 2.51),
    CNOT(B, T),
    RY(T, 1.07), RX(T, 5.70),
    CNOT(T, B),
    RZ(B, 7 * PI / 4),
])
