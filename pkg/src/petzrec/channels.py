"""Single-qubit decoherence channels in Kraus form."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NotNormalizedError, ParamOutOfRangeError
from .numerics import I2, SX, SY, SZ, as_matrix

TP_TOL = 1e-10
CP_TOL = 1e-10


class ChannelKind(str, enum.Enum):
    DEPHASING = "dephasing"
    AMPLITUDE_DAMPING = "amplitude_damping"
    DEPOLARIZING = "depolarizing"
    ERASURE = "erasure"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A channel ``rho -> sum_m E_m rho E_m^dagger``.

    The order of ``kraus`` is significant: dilations stack the operators in
    this order.
    """

    kraus: tuple[np.ndarray, ...]
    kind: ChannelKind = ChannelKind.CUSTOM
    p: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ops = tuple(np.array(as_matrix(k)) for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise DimensionMismatchError("Kraus operators have inconsistent shapes")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "kind", ChannelKind(self.kind))

    @property
    def rank(self) -> int:
        return len(self.kraus)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def zero_slots(self) -> list[int]:
        """Indices of Kraus operators that vanish identically (padding)."""
        return [i for i, k in enumerate(self.kraus) if not np.any(k)]

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRangeError(f"p={p} outside [0, 1]")
    return p


def make_dephasing(p: float) -> KrausChannel:
    # Weights carry p/2: p=1 fully dephases.
    p = _check_p(p)
    return KrausChannel(
        (math.sqrt(1 - p / 2) * I2, math.sqrt(p / 2) * SZ), ChannelKind.DEPHASING, p
    )


def make_amplitude_damping(p: float) -> KrausChannel:
    p = _check_p(p)
    e0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    e1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel((e0, e1), ChannelKind.AMPLITUDE_DAMPING, p)


def make_depolarizing(p: float) -> KrausChannel:
    p = _check_p(p)
    w = math.sqrt(p / 3)
    return KrausChannel(
        (math.sqrt(1 - p) * I2, w * SX, w * SY, w * SZ), ChannelKind.DEPOLARIZING, p
    )


def make_erasure(target) -> KrausChannel:
    """Replace any input by the pure state ``target``."""
    e = np.asarray(target, dtype=complex).reshape(-1)
    if e.shape != (2,):
        raise DimensionMismatchError("erasure target must be a qubit vector")
    if abs(np.linalg.norm(e) - 1) > 1e-10:
        raise NotNormalizedError(f"target has norm {np.linalg.norm(e):.6g}")
    col = e.reshape(2, 1)
    ops = (col @ np.array([[1, 0]]), col @ np.array([[0, 1]]))
    return KrausChannel(ops, ChannelKind.ERASURE, None, {"target": e.tolist()})


CONSTRUCTORS = {
    ChannelKind.DEPHASING: make_dephasing,
    ChannelKind.AMPLITUDE_DAMPING: make_amplitude_damping,
    ChannelKind.DEPOLARIZING: make_depolarizing,
}


def make_channel(kind: str | ChannelKind, p: float) -> KrausChannel:
    kind = ChannelKind(kind)
    if kind not in CONSTRUCTORS:
        raise ValueError(f"no parametric constructor for {kind.value}")
    return CONSTRUCTORS[kind](p)


def apply(ch: KrausChannel, rho) -> np.ndarray:
    r = as_matrix(rho)
    if r.shape != (ch.dim_in, ch.dim_in):
        raise DimensionMismatchError(f"state {r.shape} vs channel input {ch.dim_in}")
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=complex)
    for k in ch.kraus:
        out += k @ r @ k.conj().T
    return out


def adjoint_apply(ch: KrausChannel, x) -> np.ndarray:
    """Hilbert-Schmidt adjoint ``X -> sum_m E_m^dagger X E_m``."""
    m = as_matrix(x)
    if m.shape != (ch.dim_out, ch.dim_out):
        raise DimensionMismatchError(f"operator {m.shape} vs channel output {ch.dim_out}")
    out = np.zeros((ch.dim_in, ch.dim_in), dtype=complex)
    for k in ch.kraus:
        out += k.conj().T @ m @ k
    return out


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """Kraus form of ``second o first``."""
    ops = tuple(b @ a for b in second.kraus for a in first.kraus)
    return KrausChannel(ops, ChannelKind.CUSTOM, None)


def superoperator(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Row-major vectorized superoperator ``sum_m E_m (x) conj(E_m)``."""
    ops = kraus.kraus if isinstance(kraus, KrausChannel) else kraus
    return sum(np.kron(k, k.conj()) for k in ops)


def choi_matrix(kraus: Sequence[np.ndarray]) -> np.ndarray:
    ops = kraus.kraus if isinstance(kraus, KrausChannel) else kraus
    vecs = [np.asarray(k).reshape(-1, 1) for k in ops]
    return sum(v @ v.conj().T for v in vecs)


@dataclass(frozen=True)
class ChannelReport:
    tp_residual: float
    min_choi_eig: float

    @property
    def passed(self) -> bool:
        return self.tp_residual <= TP_TOL and self.min_choi_eig >= -CP_TOL


def validate(ch: KrausChannel | Sequence[np.ndarray]) -> ChannelReport:
    ops = ch.kraus if isinstance(ch, KrausChannel) else [as_matrix(k) for k in ch]
    d = ops[0].shape[1]
    tp = sum(k.conj().T @ k for k in ops)
    choi = choi_matrix(ops)
    min_eig = float(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))[0])
    return ChannelReport(float(np.linalg.norm(tp - np.eye(d))), min_eig)


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def channel_to_dict(ch: KrausChannel) -> dict:
    return {
        "kind": ch.kind.value,
        "p": ch.p,
        "kraus": [_encode_matrix(k) for k in ch.kraus],
    }


def channel_from_dict(d: dict) -> KrausChannel:
    return KrausChannel(
        tuple(_decode_matrix(k) for k in d["kraus"]), ChannelKind(d["kind"]), d.get("p")
    )


def channel_to_json(ch: KrausChannel) -> str:
    return json.dumps(channel_to_dict(ch))


def channel_from_json(text: str) -> KrausChannel:
    return channel_from_dict(json.loads(text))
