"""Rewrite CNOT/CZ circuits into single-qubit rotations and ``GPG(pi/2)``.

``CZ = e^{-i pi/4} Rz(-pi/2) (x) Rz(-pi/2) GPG(pi/2)`` and
``CNOT = H_t CZ H_t`` with ``H = Ry(pi/2) Rz(pi)`` up to phase.
"""
from __future__ import annotations

import math

from ..errors import UnsupportedGateError
from .gates import GPG, RY, RZ, Gate, GateSequence
from .twoq import merge_single_qubit_runs

HALF_PI = math.pi / 2


def _h(q: int) -> list[Gate]:
    return [RZ(q, math.pi), RY(q, HALF_PI)]


def _cz(a: int, b: int) -> list[Gate]:
    return [GPG(a, b, HALF_PI), RZ(a, -HALF_PI), RZ(b, -HALF_PI)]


def rewrite_cnot_to_gpg(gs: GateSequence, merge: bool = False) -> GateSequence:
    """Replace every CNOT and CZ by one ``GPG(pi/2)`` plus rotations.

    ``H`` gates become rotations too.  With ``merge`` the single-qubit runs
    are fused afterwards; the entangler count is unchanged either way.
    """
    out: list[Gate] = []
    for g in gs.gates:
        if g.name == "CNOT":
            c, t = g.qubits
            out += _h(t) + _cz(c, t) + _h(t)
        elif g.name == "CZ":
            out += _cz(*g.qubits)
        elif g.name == "H":
            out += _h(g.qubits[0])
        elif g.name == "GPG":
            raise UnsupportedGateError("input already contains GPG gates")
        else:
            out.append(g)
    res = GateSequence(gs.width, out)
    return merge_single_qubit_runs(res) if merge else res
