"""Two-qubit unitary synthesis with at most three CNOTs.

Works in the magic basis, where local gates ``SU(2) (x) SU(2)`` become real
orthogonal matrices.  A target ``U`` is matched to a fixed CNOT template
``T`` of the same local-equivalence class by diagonalizing the symmetric
unitaries ``U'^T U'`` and ``T'^T T'``; the left and right orthogonal
factors then give the single-qubit corrections.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .. import numerics as nx
from ..errors import ConvergenceError, DimensionMismatchError, NotUnitaryError
from .gates import (
    CNOT,
    RX,
    RY,
    RZ,
    Gate,
    GateSequence,
    raw_unitary,
    wrap_angle,
)

UNITARY_TOL = 1e-9
MATCH_TOL = 1e-9

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)
MAGIC_DAG = MAGIC.conj().T
# diagonals of XX, YY, ZZ in the magic basis
_XYZ = np.array([[1, 1, -1, -1], [-1, 1, -1, 1], [1, -1, -1, 1]], dtype=float).T

_YY = np.kron(nx.SY, nx.SY)
# fixed, irrational mixing weights for the real/imaginary diagonalization
_MIX = ((1.0, math.sqrt(2) - 1), (0.5772156649, 1.0), (1.0, -0.7071067812), (0.3183098862, 1.0))


def _check_unitary(u, dim: int) -> np.ndarray:
    u = nx.as_matrix(u)
    if u.shape != (dim, dim):
        raise DimensionMismatchError(f"expected {dim}x{dim}, got {u.shape}")
    if nx.unitarity_error(u) > UNITARY_TOL:
        raise NotUnitaryError(f"unitarity error {nx.unitarity_error(u):.2e}")
    return u


def to_special(u: np.ndarray) -> np.ndarray:
    return u / np.linalg.det(u) ** (1.0 / u.shape[0])


def _diag_symmetric_unitary(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``m = P diag(d) P^T`` with ``P`` real orthogonal, ``det P = +1``."""
    re, im = m.real, m.imag
    re = 0.5 * (re + re.T)
    im = 0.5 * (im + im.T)
    best = None
    for a, b in _MIX:
        _, p = np.linalg.eigh(a * re + b * im)
        d = p.T @ m @ p
        off = np.linalg.norm(d - np.diag(np.diag(d)))
        if best is None or off < best[0]:
            best = (off, p, np.diag(d).copy())
        if off < 1e-13:
            break
    off, p, d = best
    if off > 1e-8:
        raise ConvergenceError(f"simultaneous diagonalization residual {off:.2e}")
    if np.linalg.det(p) < 0:
        p = p.copy()
        p[:, 0] = -p[:, 0]
    return p, d


def canonical_coordinates(u) -> np.ndarray:
    """``(a, b, c)`` with ``u`` locally equivalent to ``exp(i(a XX + b YY + c ZZ))``."""
    v = to_special(_check_unitary(u, 4))
    up = MAGIC_DAG @ v @ MAGIC
    _, d = _diag_symmetric_unitary(up.T @ up)
    theta = np.angle(d) / 2
    # shift one entry by a multiple of pi so the phases sum to zero
    theta[3] -= math.pi * round(theta.sum() / math.pi)
    coords, *_ = np.linalg.lstsq(_XYZ, theta, rcond=None)
    return coords


def _local_to_pair(loc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``loc ~ A (x) B`` (4x4) into its 2x2 factors."""
    r = loc.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    a = math.sqrt(s[0]) * u[:, 0].reshape(2, 2)
    b = math.sqrt(s[0]) * vh[0].reshape(2, 2)
    return a, b


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """``(beta, gamma, delta)`` with ``u ~ Rz(beta) Ry(gamma) Rz(delta)``."""
    v = u / np.sqrt(np.linalg.det(u))
    a, b = v[0, 0], v[1, 0]
    gamma = 2 * math.atan2(abs(b), abs(a))
    if abs(a) < 1e-14:
        s, d = 0.0, 2 * np.angle(b)
    elif abs(b) < 1e-14:
        s, d = -2 * np.angle(a), 0.0
    else:
        s, d = -2 * np.angle(a), 2 * np.angle(b)
    return (s + d) / 2, gamma, (s - d) / 2


def single_qubit_gates(u: np.ndarray, q: int, tol: float = 1e-12) -> list[Gate]:
    """ZYZ gates for a 2x2 unitary in time order, dropping trivial rotations."""
    beta, gamma, delta = zyz_angles(u)
    out = []
    for make, t in ((RZ, delta), (RY, gamma), (RZ, beta)):
        t = wrap_angle(float(t))
        r = math.remainder(t, 4 * math.pi)
        if abs(r) > tol:
            out.append(make(q, t))
    return out


def _match(u: np.ndarray, t: np.ndarray):
    """Locals ``(L, R)`` with ``u ~ L t R``, or ``None`` when classes differ."""
    vu = to_special(u)
    vt = to_special(t)
    up = MAGIC_DAG @ vu @ MAGIC
    tp = MAGIC_DAG @ vt @ MAGIC
    pu, du = _diag_symmetric_unitary(up.T @ up)
    pt, dt = _diag_symmetric_unitary(tp.T @ tp)
    best = None
    for sign in (1.0, -1.0):
        for perm in itertools.permutations(range(4)):
            err = float(np.max(np.abs(du - sign * dt[list(perm)])))
            if best is None or err < best[0]:
                best = (err, sign, perm)
    err, sign, perm = best
    if err > 1e-6:
        return None
    q = np.zeros((4, 4))
    q[np.arange(4), perm] = 1.0
    o2 = pt @ q.T @ pu.T
    if np.linalg.det(o2) < 0:
        q[0] = -q[0]
        o2 = pt @ q.T @ pu.T
    phi = 1.0 if sign > 0 else 1j
    o1 = up @ np.linalg.inv(phi * tp @ o2)
    # o1 should be real up to a sign; the sign is a global phase
    if np.linalg.norm(o1.imag) > np.linalg.norm(o1.real):
        o1 = o1 * 1j
    o1 = o1.real
    left = MAGIC @ o1 @ MAGIC_DAG
    right = MAGIC @ o2 @ MAGIC_DAG
    return left, right


def _template3(a: float, b: float, c: float) -> list[Gate]:
    """Three-CNOT circuit in the class of ``exp(i(a XX + b YY + c ZZ))``."""
    h = math.pi / 2
    return [
        CNOT(1, 0),
        RZ(0, 2 * c + h),
        RY(1, 2 * a + h),
        CNOT(0, 1),
        RY(1, 2 * b + h),
        CNOT(1, 0),
    ]


def _template2(a: float, c: float) -> list[Gate]:
    """Equals ``exp(i(a XX + c ZZ))`` exactly."""
    return [CNOT(0, 1), RX(0, -2 * a), RZ(1, -2 * c), CNOT(0, 1)]


def _candidates(u: np.ndarray):
    """Templates ordered by CNOT count, cheapest plausible first."""
    v = to_special(u)
    gam = v @ _YY @ v.T @ _YY
    tr = np.trace(gam)
    if np.linalg.norm(gam - np.eye(4)) < 1e-7 or np.linalg.norm(gam + np.eye(4)) < 1e-7:
        yield []
    if abs(tr) < 1e-7 and np.linalg.norm(gam @ gam + np.eye(4)) < 1e-7:
        yield [CNOT(0, 1)]
    a, b, c = canonical_coordinates(u)
    if abs(tr.imag) < 1e-7:
        coords = (a, b, c)
        # coordinates are only fixed up to Weyl moves; try the few that matter
        for i in range(3):
            x, y = (coords[j] for j in range(3) if j != i)
            for s1, s2, shift in itertools.product((1, -1), (1, -1), (0.0, math.pi / 4)):
                yield _template2(s1 * x + shift, s2 * y + shift)
    yield _template3(a, b, c)


def _assemble(u: np.ndarray, template: list[Gate]) -> GateSequence | None:
    tgs = GateSequence(2, template)
    t = raw_unitary(tgs)
    m = _match(u, t)
    if m is None:
        return None
    left, right = m
    r0, r1 = _local_to_pair(right)
    l0, l1 = _local_to_pair(left)
    gates = single_qubit_gates(r0, 0) + single_qubit_gates(r1, 1)
    gates += template
    gates += single_qubit_gates(l0, 0) + single_qubit_gates(l1, 1)
    gs = merge_single_qubit_runs(GateSequence(2, gates))
    if nx.phase_distance(u, raw_unitary(gs)) > MATCH_TOL:
        return None
    return gs


def decompose_su4(u) -> GateSequence:
    """Gate sequence for a 4x4 unitary with at most three CNOTs.

    The result reproduces ``u`` up to global phase; qubit 0 is the most
    significant factor.
    """
    u = _check_unitary(u, 4)
    for template in _candidates(u):
        gs = _assemble(u, template)
        if gs is not None:
            return gs
    raise ConvergenceError("two-qubit synthesis failed to reach tolerance")


def merge_single_qubit_runs(gs: GateSequence) -> GateSequence:
    """Fuse consecutive single-qubit gates on each wire into one ZYZ triple."""
    pending: dict[int, list[Gate]] = {}
    out: list[Gate] = []

    def flush(q: int):
        run = pending.pop(q, [])
        if len(run) <= 1:
            out.extend(run)
            return
        m = np.eye(2, dtype=complex)
        for g in run:
            m = g.matrix() @ m
        out.extend(single_qubit_gates(m, q))

    for g in gs.gates:
        if len(g.qubits) == 1:
            pending.setdefault(g.qubits[0], []).append(g)
            continue
        for q in g.qubits:
            flush(q)
        out.append(g)
    for q in sorted(pending):
        flush(q)
    return GateSequence(gs.width, out)
