"""Three-qubit synthesis by quantum Shannon decomposition, at most 20 CNOTs.

The cosine-sine split on qubit 0 gives two block-diagonal multiplexors
around a multiplexed ``Ry``.  Each block-diagonal factor is demultiplexed
into two-qubit unitaries and a multiplexed ``Rz``.  Two optimizations bring
the generic count from 24 to 20:

* the multiplexed ``Ry`` is built from CZ gates and its final CZ is folded
  into the neighbouring multiplexor;
* the first three two-qubit unitaries are synthesized only up to a
  diagonal, which is pushed into the next two-qubit unitary.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cossin, schur

from .. import numerics as nx
from ..errors import BudgetExceededError, ConvergenceError
from .gates import CNOT, CZ, RY, RZ, Gate, GateSequence, raw_unitary
from .twoq import (
    _check_unitary,
    decompose_su4,
    merge_single_qubit_runs,
    single_qubit_gates,
    to_special,
)

CNOT_BUDGET = 20
ROUND_TRIP_TOL = 1e-6
FACTOR_TOL = 1e-10

_YY = np.kron(nx.SY, nx.SY)
_ZZ = np.kron(nx.SZ, nx.SZ)
_ZI = np.kron(nx.SZ, nx.I2)

# rotation k of a 4-rotation multiplexor flips sign with these control parities
_MUX_SIGNS = np.array(
    [[1, (-1) ** c2, (-1) ** (c1 + c2), (-1) ** c1] for c1 in (0, 1) for c2 in (0, 1)],
    dtype=float,
)


def _remap(gs: GateSequence, mapping, width: int = 3) -> list[Gate]:
    return [g.remap(mapping) for g in gs.gates]


def _mux_angles(theta: np.ndarray) -> np.ndarray:
    return np.linalg.solve(_MUX_SIGNS, theta)


def _rz_mux(theta: np.ndarray) -> list[Gate]:
    """``Rz(theta_j)`` on qubit 0 for control value ``j = 2 q1 + q2``."""
    a = _mux_angles(theta)
    return [
        RZ(0, a[0]), CNOT(2, 0),
        RZ(0, a[1]), CNOT(1, 0),
        RZ(0, a[2]), CNOT(2, 0),
        RZ(0, a[3]), CNOT(1, 0),
    ]


def _ry_mux_open(theta: np.ndarray) -> list[Gate]:
    """Multiplexed ``Ry`` without its last CZ(0, 1), which the caller absorbs."""
    a = _mux_angles(theta)
    return [
        RY(0, a[0]), CZ(2, 0),
        RY(0, a[1]), CZ(1, 0),
        RY(0, a[2]), CZ(2, 0),
        RY(0, a[3]),
    ]


def _demultiplex(x1: np.ndarray, x2: np.ndarray):
    """``x1 (+) x2 = (I (x) v)(D (+) D^dagger)(I (x) w)``; returns ``(v, phases, w)``."""
    t, v = schur(x1 @ x2.conj().T, output="complex")
    lam = np.diag(t)
    phases = np.angle(lam) / 2
    d = np.exp(1j * phases)
    w = d[:, None] * (v.conj().T @ x2)
    return v, phases, w


def _two_cnot_up_to_diagonal(u: np.ndarray) -> tuple[GateSequence, np.ndarray]:
    """Return ``(gs, delta)`` with ``u = delta @ unitary(gs)`` (up to phase), ``delta`` diagonal."""
    v = to_special(u)
    g = v @ _YY @ v.T @ _YY
    t1 = np.trace(g)
    t2 = 1j * np.trace(_ZZ @ g)
    theta = 0.5 * math.atan2(-t1.imag, t2.imag)
    dmat = np.diag(np.exp(1j * theta * np.diag(_ZZ).real))
    gs = decompose_su4(dmat @ u)
    return gs, dmat.conj()


def _factor(u: np.ndarray, da: int, db: int):
    """``u = a (x) b`` with ``a`` of size ``da``, or ``None``."""
    r = u.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    w, s, vh = np.linalg.svd(r)
    if s[1] > FACTOR_TOL * s[0]:
        return None
    a = math.sqrt(s[0]) * w[:, 0].reshape(da, da)
    b = math.sqrt(s[0]) * vh[0].reshape(db, db)
    # rescale to unitary factors
    ka = math.sqrt(abs(np.linalg.det(a)) ** (2.0 / da))
    return a / ka, b * ka


_SWAP01 = np.eye(8)[[0, 1, 4, 5, 2, 3, 6, 7]]


def _factorized(u: np.ndarray) -> list[Gate] | None:
    f = _factor(u, 2, 4)
    if f is not None:
        a, w = f
        return single_qubit_gates(a, 0) + _remap(decompose_su4(w), (1, 2))
    f = _factor(u, 4, 2)
    if f is not None:
        w, c = f
        return list(decompose_su4(w).gates) + single_qubit_gates(c, 2)
    f = _factor(_SWAP01 @ u @ _SWAP01, 2, 4)
    if f is not None:
        a, w = f
        return single_qubit_gates(a, 1) + _remap(decompose_su4(w), (0, 2))
    return None


def _qsd(u: np.ndarray) -> list[Gate]:
    (a1, a2), theta, (b1, b2) = cossin(u, p=4, q=4, separate=True)
    # time order: B multiplexor, Ry multiplexor, A multiplexor
    vb, phb, wb = _demultiplex(b1, b2)
    gs_wb, diag1 = _two_cnot_up_to_diagonal(wb)
    vb = vb @ diag1
    gs_vb, diag2 = _two_cnot_up_to_diagonal(vb)
    # fold the diagonal and the dropped CZ(0, 1) into the A multiplexor
    a1 = a1 @ diag2
    a2 = a2 @ _ZI @ diag2
    va, pha, wa = _demultiplex(a1, a2)
    gs_wa, diag3 = _two_cnot_up_to_diagonal(wa)
    va = va @ diag3
    gs_va = decompose_su4(va)

    low = (1, 2)
    gates: list[Gate] = []
    gates += _remap(gs_wb, low)
    gates += _rz_mux(-2 * phb)
    gates += _remap(gs_vb, low)
    gates += _ry_mux_open(2 * theta)
    gates += _remap(gs_wa, low)
    gates += _rz_mux(-2 * pha)
    gates += _remap(gs_va, low)
    return gates


def decompose_3q(u) -> GateSequence:
    """Gate sequence for an 8x8 unitary with at most 20 two-qubit gates.

    Qubit 0 is the most significant factor.  Raises ``BudgetExceededError``
    rather than return a longer circuit.
    """
    u = _check_unitary(u, 8)
    gates = _factorized(u)
    if gates is None:
        gates = _qsd(u)
    gs = merge_single_qubit_runs(GateSequence(3, gates))
    n = gs.entangler_count
    if n > CNOT_BUDGET:
        raise BudgetExceededError(f"{n} two-qubit gates exceed the budget of {CNOT_BUDGET}")
    err = nx.phase_distance(u, raw_unitary(gs))
    if err > ROUND_TRIP_TOL:
        raise ConvergenceError(f"three-qubit synthesis error {err:.2e}")
    return gs
