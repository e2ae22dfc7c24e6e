"""Stinespring dilation of a Petz map into a unitary on ancilla (x) system.

The ancilla register is the most significant tensor factor, so the first
two columns of the unitary are the Kraus operators stacked top to bottom:
block ``(m, 0)`` equals ``K_m``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .channels import _encode_matrix
from .errors import DimensionMismatchError, RankMismatchError, RankUnsupportedError
from .petz import PetzMap

MAX_RANK = 4


@dataclass(frozen=True, eq=False)
class DilationUnitary:
    U: np.ndarray
    M: int
    padding: tuple[int, ...] = ()
    method: str = "gram_schmidt"
    qubit_layout: tuple[str, ...] = field(default=())

    @property
    def n_ancilla(self) -> int:
        return int(round(math.log2(self.U.shape[0]))) - 1

    @property
    def width(self) -> int:
        return self.n_ancilla + 1

    def block(self, m: int, n: int = 0) -> np.ndarray:
        return self.U[2 * m : 2 * m + 2, 2 * n : 2 * n + 2]

    def to_dict(self) -> dict:
        return {
            "U": _encode_matrix(self.U),
            "M": self.M,
            "padding": list(self.padding),
            "method": self.method,
            "qubit_layout": list(self.qubit_layout),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_text(self) -> str:
        """Column-major ``row col re im`` table with 17 significant digits."""
        n, m = self.U.shape
        lines = [f"# {n} {m} column-major"]
        for j in range(m):
            for i in range(n):
                z = self.U[i, j]
                lines.append(f"{i} {j} {z.real:.17g} {z.imag:.17g}")
        return "\n".join(lines) + "\n"


def _layout(n_anc: int) -> tuple[str, ...]:
    return tuple(f"ancilla{i}" for i in range(n_anc)) + ("system",)


def _padded_slots(m: int) -> int:
    if m > MAX_RANK:
        raise RankUnsupportedError(f"Kraus rank {m} exceeds {MAX_RANK}")
    return 2 if m <= 2 else 4


def dilate_general(pm: PetzMap) -> DilationUnitary:
    """Complete the stacked Kraus isometry by Gram-Schmidt."""
    ops = list(pm.all_kraus)
    m = len(ops)
    slots = _padded_slots(m)
    padding = tuple(range(m, slots))
    ops += [np.zeros((2, 2), dtype=complex)] * len(padding)
    iso = np.vstack(ops)
    u = nx.gram_schmidt_complete(iso)
    return DilationUnitary(u, m, padding, "gram_schmidt", _layout(slots // 2))


def dilate_rank2_analytic(pm: PetzMap, g: np.ndarray | None = None) -> DilationUnitary:
    """Closed-form 4x4 dilation of a two-operator Petz map via SVD.

    With ``K_1 = U_1 D_1 V_1^dagger`` and ``K_0`` rewritten in the singular
    basis of ``K_1`` as ``U0t D0t V_1^dagger``, the unitary is
    ``diag(U0t, U_1) . Dblk . diag(V_1^dagger, G)`` where ``Dblk`` is the
    orthogonal block ``[[D0t, D_1(-i sy)], [D_1, D0t(i sy)]]``.
    """
    ops = pm.all_kraus
    if len(ops) != 2:
        raise RankMismatchError(f"analytic dilation needs 2 Kraus operators, got {len(ops)}")
    k0, k1 = ops
    u0, s0, v0 = nx.svd(k0)
    u1, s1, v1 = nx.svd(k1)
    rot = v1.conj().T @ v0
    # V1^dag K0^dag K0 V1 = I - D1^2 is diagonal, hence so is its PSD root
    d0t = np.diag(np.diag(rot @ np.diag(s0) @ rot.conj().T).real).astype(complex)
    u0t = u0 @ v0.conj().T @ v1
    d1 = np.diag(s1)
    isy = np.array([[0, 1], [-1, 0]], dtype=complex)
    dblk = np.block([[d0t, d1 @ (-isy)], [d1, d0t @ isy]])
    gmat = np.eye(2, dtype=complex) if g is None else nx.as_matrix(g)
    left = np.block([[u0t, np.zeros((2, 2))], [np.zeros((2, 2)), u1]])
    right = np.block([[v1.conj().T, np.zeros((2, 2))], [np.zeros((2, 2)), gmat]])
    return DilationUnitary(left @ dblk @ right, 2, (), "svd_analytic", _layout(1))


def apply_dilation(d: DilationUnitary, rho) -> np.ndarray:
    """``Tr_anc[U (|0><0| (x) rho) U^dagger]``."""
    r = nx.as_matrix(rho)
    if r.shape != (2, 2):
        raise DimensionMismatchError("dilation acts on a single qubit")
    dim = d.U.shape[0]
    na = dim // 2
    anc = np.zeros((na, na), dtype=complex)
    anc[0, 0] = 1.0
    full = d.U @ np.kron(anc, r) @ d.U.conj().T
    return nx.partial_trace(full, (na, 2), keep="B")


def induced_superoperator(d: DilationUnitary) -> np.ndarray:
    """Row-major superoperator of ``apply_dilation`` built from matrix units."""
    cols = []
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            cols.append(apply_dilation(d, e).reshape(-1))
    return np.array(cols).T
