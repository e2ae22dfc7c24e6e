"""Gate primitives, gate sequences and their text format.

Qubit 0 is the most significant tensor factor.  Rotations follow
``R_a(t) = exp(-i t sigma_a / 2)`` and ``GPG(t) = exp(-i t/2 sigma_z sigma_z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .. import numerics as nx
from ..errors import DimensionMismatchError, IndexOutOfRangeError, UnsupportedGateError

ROTATIONS = ("RX", "RY", "RZ")
ONE_QUBIT = ROTATIONS + ("H",)
TWO_QUBIT = ("CNOT", "CZ", "GPG")
ANGLED = ROTATIONS + ("GPG",)

H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CNOT_MAT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ_MAT = np.diag([1, 1, 1, -1]).astype(complex)


def rx(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def zz(t: float) -> np.ndarray:
    """``exp(-i t/2 Z(x)Z)``."""
    e = np.exp(-0.5j * t)
    return np.diag([e, e.conjugate(), e.conjugate(), e])


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if name in ONE_QUBIT:
            n = 1
        elif name in TWO_QUBIT:
            n = 2
        else:
            raise UnsupportedGateError(f"unknown gate {self.name!r}")
        if len(self.qubits) != n:
            raise ValueError(f"{name} acts on {n} qubit(s), got {self.qubits}")
        if n == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{name} needs two distinct qubits")
        if name in ANGLED:
            if self.angle is None:
                raise ValueError(f"{name} needs an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{name} takes no angle")

    @property
    def is_entangling(self) -> bool:
        return self.name in TWO_QUBIT

    def matrix(self) -> np.ndarray:
        """Matrix on ``self.qubits`` in the listed order (first = most significant)."""
        n = self.name
        if n == "RX":
            return rx(self.angle)
        if n == "RY":
            return ry(self.angle)
        if n == "RZ":
            return rz(self.angle)
        if n == "H":
            return H_MAT
        if n == "CNOT":
            return CNOT_MAT
        if n == "CZ":
            return CZ_MAT
        return zz(self.angle)

    def to_line(self) -> str:
        qs = " ".join(f"q{q}" for q in self.qubits)
        if self.angle is None:
            return f"{self.name} {qs}"
        return f"{self.name} {qs} {self.angle!r}"

    def remap(self, mapping: Sequence[int]) -> "Gate":
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.angle)


def RX(q: int, t: float) -> Gate:
    return Gate("RX", (q,), t)


def RY(q: int, t: float) -> Gate:
    return Gate("RY", (q,), t)


def RZ(q: int, t: float) -> Gate:
    return Gate("RZ", (q,), t)


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def CZ(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def GPG(a: int, b: int, t: float) -> Gate:
    return Gate("GPG", (a, b), t)


@dataclass(frozen=True)
class GateSequence:
    width: int
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q < 0 or q >= self.width for q in g.qubits):
                raise IndexOutOfRangeError(f"{g.to_line()} outside width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def count(self, *names: str) -> int:
        names = tuple(n.upper() for n in names)
        return sum(g.name in names for g in self.gates)

    @property
    def cnot_count(self) -> int:
        return self.count("CNOT")

    @property
    def entangler_count(self) -> int:
        return sum(g.is_entangling for g in self.gates)

    def then(self, other: "GateSequence | Iterable[Gate]") -> "GateSequence":
        more = other.gates if isinstance(other, GateSequence) else tuple(other)
        return GateSequence(self.width, self.gates + tuple(more))

    def to_text(self) -> str:
        lines = [f"# width {self.width}"] + [g.to_line() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, width: int | None = None) -> "GateSequence":
        gates = []
        declared = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "width":
                    declared = int(parts[1])
                continue
            tok = line.split()
            name = tok[0].upper()
            qubits = []
            rest = []
            for t in tok[1:]:
                if t.lower().startswith("q") and t[1:].isdigit():
                    qubits.append(int(t[1:]))
                else:
                    rest.append(float(t))
            gates.append(Gate(name, tuple(qubits), rest[0] if rest else None))
        w = width or declared
        if w is None:
            w = 1 + max((q for g in gates for q in g.qubits), default=0)
        return cls(w, tuple(gates))


def apply_gate(state: np.ndarray, gate: Gate, width: int) -> np.ndarray:
    """Left-multiply the ``(2**width, k)`` array ``state`` by ``gate``."""
    k = state.shape[1]
    t = state.reshape((2,) * width + (k,))
    m = gate.matrix()
    qs = list(gate.qubits)
    n = len(qs)
    m = m.reshape((2,) * (2 * n))
    t = np.tensordot(m, t, axes=(list(range(n, 2 * n)), qs))
    # tensordot puts the gate's output axes first; move them back
    t = np.moveaxis(t, list(range(n)), qs)
    return t.reshape(2**width, k)


def raw_unitary(gs: GateSequence, gates: Iterable[Gate] | None = None) -> np.ndarray:
    """Product of gate matrices in time order, no phase normalization."""
    dim = 2**gs.width
    u = np.eye(dim, dtype=complex)
    for g in gs.gates if gates is None else gates:
        u = apply_gate(u, g, gs.width)
    return u


def embed(op: np.ndarray, qubits: Sequence[int], width: int) -> np.ndarray:
    """Full ``2**width`` matrix of ``op`` acting on ``qubits``."""
    n = len(qubits)
    dim = 2**width
    t = np.eye(dim, dtype=complex).reshape((2,) * width + (dim,))
    t = np.tensordot(op.reshape((2,) * (2 * n)), t, axes=(list(range(n, 2 * n)), list(qubits)))
    t = np.moveaxis(t, list(range(n)), list(qubits))
    return t.reshape(dim, dim)


def sequence_unitary(gs: GateSequence) -> np.ndarray:
    """Unitary of the sequence with the package's global-phase convention."""
    return nx.fix_global_phase(raw_unitary(gs))


def verify_equiv(u, gs: GateSequence) -> float:
    """Phase-minimized Frobenius distance between ``u`` and the sequence."""
    u = nx.as_matrix(u)
    if u.shape != (2**gs.width, 2**gs.width):
        raise DimensionMismatchError(f"{u.shape} vs width {gs.width}")
    return nx.phase_distance(u, raw_unitary(gs))


def wrap_angle(t: float) -> float:
    """Map into ``(-2pi, 2pi]``."""
    twopi = 2 * math.pi
    t = math.fmod(t, 2 * twopi)
    if t > twopi:
        t -= 2 * twopi
    elif t <= -twopi:
        t += 2 * twopi
    return t
