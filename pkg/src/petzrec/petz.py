"""Bloch-sphere states and the Petz recovery map.

For a channel ``E`` with Kraus operators ``E_m`` and reference state
``gamma`` the recovery channel has Kraus operators

    K_m = sqrt(gamma) E_m^dagger E(gamma)^(-1/2)

with the inverse square root taken on the support of ``E(gamma)``.  When
``E(gamma)`` is singular the ``K_m`` are only trace preserving on that
support; a measure-and-prepare completion then sends the orthogonal
complement to ``gamma`` so the full map stays CPTP.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .channels import KrausChannel, apply, channel_to_dict, _encode_matrix
from .errors import NotStateError, RadiusOutOfRangeError, ReferenceOutOfBallError

RADIUS_TOL = 1e-12


@dataclass(frozen=True)
class BlochState:
    """Qubit state ``(I + R n . sigma) / 2`` with ``n`` at polar angles ``(theta, phi)``.

    Angles are used as given (no wrapping), so offsets that push ``theta``
    outside ``[0, pi]`` still describe a valid state.
    """

    R: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not (-RADIUS_TOL <= self.R <= 1 + RADIUS_TOL) or not math.isfinite(self.R):
            raise RadiusOutOfRangeError(f"R={self.R} outside [0, 1]")

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return self.R * np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def density(self) -> np.ndarray:
        return bloch_to_density(self)

    def shifted(self, dR: float = 0.0, dtheta: float = 0.0, dphi: float = 0.0) -> "BlochState":
        r = self.R + dR
        if not (-RADIUS_TOL <= r <= 1 + RADIUS_TOL):
            raise ReferenceOutOfBallError(f"reference radius {r} outside [0, 1]")
        return BlochState(min(max(r, 0.0), 1.0), self.theta + dtheta, self.phi + dphi)

    def to_dict(self) -> dict:
        return {"R": self.R, "theta": self.theta, "phi": self.phi}


def bloch_to_density(s: BlochState) -> np.ndarray:
    x, y, z = s.vector
    return 0.5 * (nx.I2 + x * nx.SX + y * nx.SY + z * nx.SZ)


def bloch_vectors_to_density(vecs: np.ndarray) -> np.ndarray:
    """Stack of density matrices from an ``(N, 3)`` array of Bloch vectors."""
    v = np.asarray(vecs, dtype=float)
    out = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 0.5 * (1 + v[..., 2])
    out[..., 1, 1] = 0.5 * (1 - v[..., 2])
    out[..., 0, 1] = 0.5 * (v[..., 0] - 1j * v[..., 1])
    out[..., 1, 0] = 0.5 * (v[..., 0] + 1j * v[..., 1])
    return out


def density_to_bloch(rho) -> BlochState:
    r = nx.check_state(rho)
    if r.shape != (2, 2):
        raise NotStateError("not a qubit state")
    x, y, z = (float(np.trace(r @ s).real) for s in nx.PAULIS)
    R = math.sqrt(x * x + y * y + z * z)
    if R > 1 + 1e-9:
        raise NotStateError(f"Bloch radius {R} > 1")
    R = min(R, 1.0)
    if R < 1e-15:
        return BlochState(0.0, 0.0, 0.0)
    theta = math.acos(max(-1.0, min(1.0, z / R)))
    if R * math.sin(theta) < 1e-12:
        phi = 0.0
    else:
        phi = math.atan2(y, x) % (2 * math.pi)
    return BlochState(R, theta, phi)


@dataclass(frozen=True, eq=False)
class PetzMap:
    kraus: tuple[np.ndarray, ...]
    source: KrausChannel
    gamma: BlochState
    support_projector: np.ndarray
    completion: tuple[np.ndarray, ...] = field(default=())

    @property
    def all_kraus(self) -> tuple[np.ndarray, ...]:
        return tuple(self.kraus) + tuple(self.completion)

    @property
    def completed(self) -> bool:
        return bool(self.completion)

    @property
    def support_rank(self) -> int:
        return int(round(np.trace(self.support_projector).real))

    @property
    def channel(self) -> KrausChannel:
        return KrausChannel(self.all_kraus)

    def __call__(self, rho) -> np.ndarray:
        return apply(self.channel, rho)

    def to_dict(self) -> dict:
        return {
            "kraus": [_encode_matrix(k) for k in self.kraus],
            "completion": [_encode_matrix(k) for k in self.completion],
            "gamma": self.gamma.to_dict(),
            "channel": channel_to_dict(self.source),
            "support_rank": self.support_rank,
            "completed": self.completed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_petz(ch: KrausChannel, gamma, cutoff: float = nx.PINV_CUTOFF) -> PetzMap:
    """Petz recovery map of ``ch`` tuned to the reference ``gamma``."""
    if not isinstance(gamma, BlochState):
        gamma = density_to_bloch(gamma)
    g = bloch_to_density(gamma)
    eg = apply(ch, g)
    sg = nx.psd_sqrt(g)
    inv = nx.psd_pinv_sqrt(eg, cutoff)
    kraus = tuple(sg @ e.conj().T @ inv for e in ch.kraus)
    proj = nx.support_projector(eg, cutoff)
    completion: tuple[np.ndarray, ...] = ()
    d = proj.shape[0]
    if np.trace(proj).real < d - 0.5:
        # off-support inputs are measured and replaced by gamma
        comp = nx.herm_eig(np.eye(d) - proj)
        kernel = comp.eigenvectors[:, comp.eigenvalues > 0.5]
        gdec = nx.herm_eig(g)
        ops = []
        for lam, psi in zip(gdec.eigenvalues, gdec.eigenvectors.T):
            if lam <= 1e-15:
                continue
            for v in kernel.T:
                ops.append(math.sqrt(lam) * np.outer(psi, v.conj()))
        completion = tuple(ops)
    return PetzMap(kraus, ch, gamma, proj, completion)


def recovery_fidelity(pm: PetzMap, rho) -> float:
    """``F(rho, R(E(rho)))``."""
    r = rho.density() if isinstance(rho, BlochState) else nx.as_matrix(rho)
    return nx.uhlmann_fidelity(r, pm(apply(pm.source, r)))


def recovery_error_deltaF(rho0: BlochState, mismatch, ch: KrausChannel) -> float:
    """Infidelity of Petz recovery when the reference is off by ``mismatch``.

    ``mismatch`` is ``(dR, dtheta, dphi)``; the reference is
    ``rho0`` shifted by it.
    """
    dR, dtheta, dphi = mismatch
    gamma = rho0.shifted(dR, dtheta, dphi)
    pm = build_petz(ch, gamma)
    return min(max(1.0 - recovery_fidelity(pm, rho0), 0.0), 1.0)


def perfect_recovery_residual(rho, gamma, ch: KrausChannel) -> float:
    """``|D(E(rho)||E(gamma)) - D(rho||gamma)|``; ``inf`` on support violation."""
    r = rho.density() if isinstance(rho, BlochState) else nx.as_matrix(rho)
    g = gamma.density() if isinstance(gamma, BlochState) else nx.as_matrix(gamma)
    before = nx.relative_entropy(r, g)
    after = nx.relative_entropy(apply(ch, r), apply(ch, g))
    if math.isinf(before) or math.isinf(after):
        return math.inf
    return abs(after - before)


# -- batched qubit path used by the parameter sweeps -------------------------------


def _batched_apply(kraus, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in kraus:
        out += k @ rho @ k.conj().T
    return out


def petz_recover_batch(
    ch: KrausChannel, gammas: np.ndarray, sigma: np.ndarray, cutoff: float = nx.PINV_CUTOFF
) -> np.ndarray:
    """Apply the Petz map of ``ch`` for each reference in ``gammas`` to ``sigma``.

    ``gammas`` is ``(N, 2, 2)``; ``sigma`` is either one ``(2, 2)`` state or a
    matching stack.  Agrees with ``build_petz(...)(sigma)`` including the
    completion on singular ``E(gamma)``.
    """
    g = np.asarray(gammas, dtype=complex)
    sig = np.broadcast_to(np.asarray(sigma, dtype=complex), g.shape)
    wg, vg = np.linalg.eigh(g)
    sqrt_g = (vg * np.sqrt(np.clip(wg, 0, None))[..., None, :]) @ nx.dagger(vg)
    eg = _batched_apply(ch.kraus, g)
    we, ve = np.linalg.eigh(0.5 * (eg + nx.dagger(eg)))
    we = np.clip(we, 0, None)
    keep = we > cutoff * we[..., -1:]
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, we, 1.0)), 0.0)
    pinv = (ve * inv[..., None, :]) @ nx.dagger(ve)
    x = pinv @ sig @ pinv
    inner = np.zeros_like(x)
    for k in ch.kraus:
        inner += k.conj().T @ x @ k
    out = sqrt_g @ inner @ sqrt_g
    off = ~keep
    if np.any(off):
        proj_off = (ve * off[..., None, :]) @ nx.dagger(ve)
        weight = np.einsum("...ij,...ji->...", proj_off, sig).real
        out = out + weight[..., None, None] * g
    return out


def delta_f_grid(
    ch: KrausChannel,
    rho0: BlochState,
    dtheta: np.ndarray,
    dphi: np.ndarray,
    dR: float = 0.0,
) -> np.ndarray:
    """Recovery error on the outer grid ``dtheta x dphi`` (shape ``(len(dtheta), len(dphi))``)."""
    R = rho0.R + dR
    if not (-RADIUS_TOL <= R <= 1 + RADIUS_TOL):
        raise ReferenceOutOfBallError(f"reference radius {R} outside [0, 1]")
    R = min(max(R, 0.0), 1.0)
    th = rho0.theta + np.asarray(dtheta, dtype=float)[:, None]
    ph = rho0.phi + np.asarray(dphi, dtype=float)[None, :]
    th, ph = np.broadcast_arrays(th, ph)
    vec = R * np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
    )
    gammas = bloch_vectors_to_density(vec.reshape(-1, 3))
    rho = bloch_to_density(rho0)
    recovered = petz_recover_batch(ch, gammas, apply(ch, rho))
    fid = nx.qubit_fidelity(np.broadcast_to(rho, recovered.shape), recovered)
    return np.clip(1.0 - fid, 0.0, 1.0).reshape(th.shape)
