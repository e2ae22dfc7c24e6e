"""Trapped-ion noise model for circuits built from rotations and GPG gates.

A spin-dependent force drives the motional mode around a loop in phase
space.  Miscalibration leaves a residual displacement ``sqrt(Delta) J_z``
(``J_z = (Z (x) I + I (x) Z) / 2``) and a systematic over-rotation
``GPG(Delta)``.  Tracing out the motion turns the residual displacement
into a dephasing in the eigenbasis of the generator, with element-wise
factors ``exp(-Delta (l_i - l_j)^2 / 2)``.

Each dephasing event in a circuit is commuted to the end, where it acts in
the basis of ``G_l = V_l J_z V_l^dagger`` with ``V_l`` the downstream
unitary.  The ``combined`` mode merges all events into one displacement
by ``sum_l G_l``; ``exact_product`` applies them one after another.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

from . import numerics as nx
from .channels import KrausChannel, apply
from .errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    NegativeDeltaError,
    UnsupportedGateError,
    ZeroDetuningError,
)
from .petz import PetzMap
from .synth.gates import CZ_MAT, Gate, GateSequence, apply_gate, embed, zz

JZ = 0.5 * (np.kron(nx.SZ, nx.I2) + np.kron(nx.I2, nx.SZ))
MIN_CUTOFF = 16
TAIL_TOL = 1e-12


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if delta < 0 or not math.isfinite(delta):
        raise NegativeDeltaError(f"Delta={delta} must be finite and >= 0")
    return delta


# -- single-gate physics -----------------------------------------------------------


@dataclass(frozen=True)
class TrapParams:
    """Spin-motion coupling ``g``, detuning ``delta``, coupling offset ``eps_g`` (rad/s)."""

    g: float
    delta: float
    eps_g: float = 0.0
    loops: int = 1

    def __post_init__(self):
        if self.delta == 0:
            raise ZeroDetuningError("detuning must be nonzero")

    @property
    def gate_time(self) -> float:
        """``T = 2 pi L / delta``: the force closes ``L`` loops."""
        return 2 * math.pi * self.loops / abs(self.delta)

    @property
    def gate_error(self) -> float:
        return (self.eps_g / self.delta) ** 2


def trajectory(tp: TrapParams, t: float | None = None) -> tuple[complex, float]:
    """Phase-space displacement ``alpha(t)`` and geometric phase ``Phi(t)``."""
    if tp.delta == 0:
        raise ZeroDetuningError("detuning must be nonzero")
    t = tp.gate_time if t is None else float(t)
    r = tp.g / tp.delta
    dt = tp.delta * t
    alpha = -1j * r * (np.exp(1j * dt) - 1)
    phi = r * r * (dt - math.sin(dt))
    return complex(alpha), float(phi)


def gate_error(tp: TrapParams) -> float:
    """``Delta = (eps_g / delta)^2``."""
    return tp.gate_error


def eph_channel(delta: float, pair=(0, 1), width: int = 2) -> KrausChannel:
    """Phase-flip channel ``{e^{-D/2} sqrt(cosh D) I, e^{-D/2} sqrt(sinh D) CZ}``."""
    delta = _check_delta(delta)
    # e^{-D} cosh D and e^{-D} sinh D without overflow
    w1 = -0.5 * math.expm1(-2 * delta)
    w0 = 1.0 - w1
    dim = 2**width
    cz = embed(CZ_MAT, pair, width)
    return KrausChannel((math.sqrt(w0) * np.eye(dim), math.sqrt(w1) * cz))


def gpg_noise_channel(delta: float, phi: float, pair=(0, 1), width: int = 2) -> KrausChannel:
    """``E_ph o U_sys(Delta) o GPG(phi)`` as a Kraus channel."""
    delta = _check_delta(delta)
    u = embed(zz(phi + delta), pair, width)
    return KrausChannel(tuple(k @ u for k in eph_channel(delta, pair, width).kraus))


# -- channels on the full register ------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpinChannel:
    """Linear map on ``d x d`` operators stored as a row-major superoperator."""

    superop: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(math.sqrt(self.superop.shape[0])))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        r = np.asarray(rho, dtype=complex)
        d = self.dim
        if r.shape[-2:] != (d, d):
            raise DimensionMismatchError(f"state {r.shape} vs channel dimension {d}")
        flat = r.reshape(r.shape[:-2] + (d * d,))
        return (flat @ self.superop.T).reshape(r.shape)

    def then(self, other: "SpinChannel") -> "SpinChannel":
        """``other o self``."""
        return SpinChannel(other.superop @ self.superop)

    def distance(self, other: "SpinChannel") -> float:
        return float(np.linalg.norm(self.superop - other.superop))

    @classmethod
    def identity(cls, d: int) -> "SpinChannel":
        return cls(np.eye(d * d, dtype=complex))

    @classmethod
    def from_kraus(cls, ops) -> "SpinChannel":
        ops = ops.kraus if isinstance(ops, KrausChannel) else ops
        return cls(sum(np.kron(k, k.conj()) for k in ops))

    @classmethod
    def unitary(cls, u: np.ndarray) -> "SpinChannel":
        return cls(np.kron(u, u.conj()))


def hadamard_dephaser(generator: np.ndarray, delta: float) -> SpinChannel:
    """Trace of a displacement by ``sqrt(delta) G``: Gaussian dephasing in G's eigenbasis."""
    dec = nx.herm_eig(generator)
    lam, w = dec.eigenvalues, dec.eigenvectors
    f = np.exp(-0.5 * delta * (lam[:, None] - lam[None, :]) ** 2)
    # rho -> W [(W^dag rho W) o F] W^dag
    a = np.kron(w, w.conj())
    return SpinChannel(a @ (f.reshape(-1)[:, None] * a.conj().T))


# -- circuits ---------------------------------------------------------------------


def _segments(gs: GateSequence, rotation_offset: float = 0.0):
    """Split into ``(seg_0, gpg_1, seg_1, ..., gpg_n, seg_n)``.

    ``seg_k`` are the products of the single-qubit gates between GPGs.
    """
    dim = 2**gs.width
    segs = []
    gpgs: list[Gate] = []
    cur = np.eye(dim, dtype=complex)
    for g in gs.gates:
        if g.name == "GPG":
            segs.append(cur)
            gpgs.append(g)
            cur = np.eye(dim, dtype=complex)
        elif len(g.qubits) == 1:
            if rotation_offset and g.angle is not None:
                g = Gate(g.name, g.qubits, g.angle + rotation_offset)
            cur = apply_gate(cur, g, gs.width)
        else:
            raise UnsupportedGateError(f"{g.name} must be rewritten into GPG gates first")
    segs.append(cur)
    return segs, gpgs


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    generators: tuple[np.ndarray, ...]
    unitary: np.ndarray
    width: int
    total: np.ndarray = field(init=False)

    def __post_init__(self):
        dim = 2**self.width
        tot = sum(self.generators, np.zeros((dim, dim), dtype=complex))
        object.__setattr__(self, "total", tot)

    @property
    def spectrum(self) -> nx.SpectralDecomposition:
        return nx.herm_eig(self.total)

    def __len__(self) -> int:
        return len(self.generators)


class NoisyCircuit:
    """A rotation+GPG circuit with per-GPG systematic shifts and residual motion.

    The single-qubit segments are multiplied out once so that evaluating a
    new ``Delta`` only touches the GPG layers.
    """

    def __init__(self, gs: GateSequence, rotation_offset: float = 0.0):
        self.gs = gs
        self.width = gs.width
        self.segments, self.gpgs = _segments(gs, rotation_offset)
        self._jz = [embed(JZ, g.qubits, self.width) for g in self.gpgs]

    def _layers(self, delta: float) -> list[np.ndarray]:
        # GPG(phi) followed by GPG(delta) on the same pair is GPG(phi + delta)
        return [embed(zz(g.angle + delta), g.qubits, self.width) for g in self.gpgs]

    def generators(self, delta: float) -> GeneratorSet:
        delta = _check_delta(delta)
        layers = self._layers(delta)
        n = len(layers)
        gens = [None] * n
        v = self.segments[n]
        for l in range(n - 1, -1, -1):
            gens[l] = v @ self._jz[l] @ v.conj().T
            v = v @ layers[l] @ self.segments[l]
        return GeneratorSet(tuple(gens), v, self.width)

    def unitary(self, delta: float = 0.0) -> np.ndarray:
        return self.generators(delta).unitary


def residual_generators(gs: GateSequence, delta: float, rotation_offset: float = 0.0) -> GeneratorSet:
    """One generator ``V_l J_z V_l^dagger`` per GPG of ``gs``."""
    return NoisyCircuit(gs, rotation_offset).generators(delta)


def residual_motion_channel(gens: GeneratorSet, delta: float, mode: str = "combined") -> SpinChannel:
    delta = _check_delta(delta)
    dim = 2**gens.width
    if mode == "combined":
        return hadamard_dephaser(gens.total, delta)
    if mode == "exact_product":
        ch = SpinChannel.identity(dim)
        # earliest gate's event happens first
        for g in gens.generators:
            ch = ch.then(hadamard_dephaser(g, delta))
        return ch
    raise ValueError(f"unknown mode {mode!r}")


def _coherent_tail(beta: float, cutoff: int) -> float:
    return float(poisson.sf(cutoff - 1, beta * beta))


def fock_oracle_channel(
    gens: GeneratorSet, delta: float, cutoff: int = 32, product: bool = False
) -> SpinChannel:
    """Residual-motion channel by explicit displacement on spin (x) Fock.

    The mode starts in the vacuum and is traced out.  With ``product`` the
    displacements ``D(sqrt(Delta) G_l)`` are applied one after another on
    the same mode instead of one merged ``D(sqrt(Delta) sum G_l)``.
    """
    delta = _check_delta(delta)
    if cutoff < MIN_CUTOFF:
        raise CutoffTooSmallError(f"cutoff {cutoff} < {MIN_CUTOFF}")
    ops = list(gens.generators) if product else [gens.total]
    reach = math.sqrt(delta) * sum(float(np.max(np.abs(np.linalg.eigvalsh(g)))) for g in ops)
    tail = _coherent_tail(reach, cutoff)
    if tail > TAIL_TOL:
        raise CutoffTooSmallError(f"Fock tail mass {tail:.2e} at cutoff {cutoff}")
    dim = 2**gens.width
    # truncation error shows up at the top of the ladder; pad the mode
    pad = cutoff + 16
    ap = np.diag(np.sqrt(np.arange(1, pad)), 1).astype(complex)
    quadp = ap.conj().T - ap
    disp = np.eye(dim * pad, dtype=complex)
    for g in ops:
        disp = expm(math.sqrt(delta) * np.kron(g, quadp)) @ disp
    # columns with the mode in vacuum, rows restricted to the first `cutoff` levels
    iso = disp.reshape(dim, pad, dim, pad)[:, :cutoff, :, 0]
    cols = []
    for i in range(dim):
        for j in range(dim):
            e = iso[:, :, i]
            f = iso[:, :, j]
            cols.append((e @ f.conj().T).reshape(-1))
    return SpinChannel(np.array(cols).T)


# -- noisy Petz recovery ----------------------------------------------------------


class NoisyPetz:
    """Petz map run through its compiled GPG circuit under the noise model.

    The ancilla register is the most significant factor and starts in
    ``|0...0>``.
    """

    def __init__(self, pm: PetzMap, gs: GateSequence, rotation_offset: float = 0.0, mode: str = "combined"):
        self.pm = pm
        self.circuit = NoisyCircuit(gs, rotation_offset)
        self.mode = mode
        self.n_anc = gs.width - 1

    def system_map(self, delta: float) -> SpinChannel:
        """Superoperator of ``sigma -> Tr_anc[E_RM(U (|0><0| (x) sigma) U^dagger)]``."""
        gens = self.circuit.generators(delta)
        u0 = gens.unitary[:, :2]
        dim = 2**self.circuit.width
        na = dim // 2
        if self.mode == "combined" and len(gens):
            dec = nx.herm_eig(gens.total)
            lam, w = dec.eigenvalues, dec.eigenvectors
            fac = np.exp(-0.5 * delta * (lam[:, None] - lam[None, :]) ** 2)
            b = w.conj().T @ u0
            cols = []
            for i in range(2):
                for j in range(2):
                    x = np.outer(b[:, i], b[:, j].conj()) * fac
                    y = w @ x @ w.conj().T
                    cols.append(np.einsum("aiak->ik", y.reshape(na, 2, na, 2)).reshape(-1))
            return SpinChannel(np.array(cols).T)
        rm = residual_motion_channel(gens, delta, self.mode)
        cols = []
        for i in range(2):
            for j in range(2):
                y = rm(np.outer(u0[:, i], u0[:, j].conj()))
                cols.append(np.einsum("aiak->ik", y.reshape(na, 2, na, 2)).reshape(-1))
        return SpinChannel(np.array(cols).T)

    def __call__(self, sigma, delta: float) -> np.ndarray:
        return self.system_map(delta)(nx.as_matrix(sigma))


def noisy_petz_apply(
    pm: PetzMap,
    gs: GateSequence,
    delta: float,
    rho,
    mode: str = "combined",
    rotation_offset: float = 0.0,
) -> np.ndarray:
    """Noisy recovery ``Tr_anc[E_RM o U^(Delta) (|0><0| (x) rho)]``."""
    return NoisyPetz(pm, gs, rotation_offset, mode)(rho, delta)


def recovery_error_epsilon(
    pm: PetzMap,
    gs: GateSequence,
    delta: float,
    rho,
    mode: str = "combined",
    rotation_offset: float = 0.0,
) -> float:
    """``1 - F(R(E(rho)), R^(Delta)(E(rho)))``."""
    r = rho.density() if hasattr(rho, "density") else nx.as_matrix(rho)
    sigma = apply(pm.source, r)
    ideal = pm(sigma)
    noisy = noisy_petz_apply(pm, gs, delta, sigma, mode, rotation_offset)
    return min(max(1.0 - nx.uhlmann_fidelity(ideal, noisy), 0.0), 1.0)
