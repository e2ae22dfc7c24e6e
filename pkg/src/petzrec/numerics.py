"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
helpers here add the tolerance policy the rest of the package relies on:
near-PSD inputs are clipped instead of rejected, pseudo-inverses use a
cutoff relative to the largest eigenvalue, and returned eigenvalues are
sorted in descending order.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    NonSquareError,
    NotHermitianError,
    NotIsometryError,
    NotPSDError,
    NotStateError,
)

HERMITIAN_TOL = 1e-10
PSD_CLIP_TOL = 1e-12
PINV_CUTOFF = 1e-12
GS_SKIP_TOL = 1e-10
STATE_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"matrix is {m.shape[0]}x{m.shape[1]}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def herm_eig(a) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized before diagonalization; an anti-Hermitian part
    larger than ``1e-10 * ||A||_F`` is rejected.
    """
    m = _square(a)
    scale = np.linalg.norm(m)
    if scale > 0 and np.linalg.norm(m - m.conj().T) > HERMITIAN_TOL * scale:
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + m.conj().T)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(str(exc)) from exc
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def _psd_spectrum(a) -> SpectralDecomposition:
    dec = herm_eig(a)
    w = dec.eigenvalues
    bound = PSD_CLIP_TOL * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    if w.size and w[-1] < -bound:
        raise NotPSDError(f"smallest eigenvalue {w[-1]:.3e} is negative")
    return SpectralDecomposition(np.clip(w, 0.0, None), dec.eigenvectors)


def psd_sqrt(a) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    dec = _psd_spectrum(a)
    v = dec.eigenvectors
    return (v * np.sqrt(dec.eigenvalues)) @ v.conj().T


def psd_pinv_sqrt(a, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Moore-Penrose inverse square root.

    Eigenvalues at or below ``cutoff * lambda_max`` are treated as zero.
    """
    dec = _psd_spectrum(a)
    w, v = dec.eigenvalues, dec.eigenvectors
    lmax = w[0] if w.size else 0.0
    keep = w > cutoff * lmax
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ v.conj().T


def support_projector(a, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    dec = _psd_spectrum(a)
    w, v = dec.eigenvalues, dec.eigenvectors
    keep = w > cutoff * (w[0] if w.size else 0.0)
    vs = v[:, keep]
    return vs @ vs.conj().T


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, s, V)`` with ``a = U @ diag(s) @ V^dagger``.

    Singular values come out descending.  Each row of ``V^dagger`` is
    rotated so that its first non-negligible entry is real and
    non-negative, with the compensating phase moved into ``U``.
    """
    m = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceError(str(exc)) from exc
    k = min(m.shape)
    for i in range(vh.shape[0]):
        row = vh[i]
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size == 0:
            continue
        ph = row[nz[0]] / abs(row[nz[0]])
        vh[i] = row / ph
        if i < k:
            u[:, i] = u[:, i] * ph
    return u, s, vh.conj().T


def gram_schmidt_complete(iso, n: int | None = None) -> np.ndarray:
    """Extend orthonormal columns to a full unitary.

    Candidates are canonical basis vectors in index order; a candidate whose
    residual after projection is shorter than 1e-10 is skipped.  The input
    columns are copied verbatim into the leading columns of the result.
    """
    q = as_matrix(iso)
    if n is None:
        n = q.shape[0]
    if q.shape[0] != n:
        raise DimensionMismatchError(f"isometry has {q.shape[0]} rows, expected {n}")
    k = q.shape[1]
    if np.linalg.norm(q.conj().T @ q - np.eye(k)) > 1e-9:
        raise NotIsometryError("input columns are not orthonormal")
    cols = [q[:, j] for j in range(k)]
    basis = np.array(cols).T if cols else np.zeros((n, 0), dtype=complex)
    for idx in range(n):
        if len(cols) == n:
            break
        e = np.zeros(n, dtype=complex)
        e[idx] = 1.0
        r = e - basis @ (basis.conj().T @ e)
        r = r - basis @ (basis.conj().T @ r)  # second pass for stability
        nr = np.linalg.norm(r)
        if nr < GS_SKIP_TOL:
            continue
        cols.append(r / nr)
        basis = np.array(cols).T
    if len(cols) != n:  # pragma: no cover - cannot happen for an isometry
        raise ConvergenceError("basis completion failed")
    out = np.array(cols).T
    out[:, :k] = q
    return out


def kron(*mats) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def partial_trace(rho, dims: Sequence[int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``A (x) B``."""
    m = _square(rho)
    da, db = dims
    if m.shape[0] != da * db:
        raise DimensionMismatchError(f"{m.shape} incompatible with dims {dims}")
    t = m.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError("keep must be 'A' or 'B'")


def check_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    m = _square(rho)
    if abs(np.trace(m) - 1) > tol:
        raise NotStateError(f"trace {np.trace(m).real:.3e} != 1")
    if np.linalg.norm(m - m.conj().T) > tol:
        raise NotStateError("state is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] < -tol:
        raise NotStateError("state has a negative eigenvalue")
    return m


def uhlmann_fidelity(rho0, rho1) -> float:
    """Squared Uhlmann fidelity ``Tr[sqrt(sqrt(rho0) rho1 sqrt(rho0))]^2``."""
    a = check_state(rho0)
    b = check_state(rho1)
    if a.shape != b.shape:
        raise DimensionMismatchError("states have different dimensions")
    sa = psd_sqrt(a)
    w = np.linalg.eigvalsh(0.5 * ((sa @ b @ sa) + (sa @ b @ sa).conj().T))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def qubit_fidelity(rho0: np.ndarray, rho1: np.ndarray) -> np.ndarray:
    """Vectorized qubit fidelity over stacks of shape ``(..., 2, 2)``.

    Uses ``F = Tr(rho sigma) + 2 sqrt(det rho det sigma)``, exact for 2x2.
    """
    overlap = np.einsum("...ij,...ji->...", rho0, rho1).real
    d0 = np.linalg.det(rho0).real
    d1 = np.linalg.det(rho1).real
    f = overlap + 2.0 * np.sqrt(np.clip(d0, 0, None) * np.clip(d1, 0, None))
    return np.clip(f, 0.0, 1.0)


def relative_entropy(rho, gamma, cutoff: float = PINV_CUTOFF) -> float:
    """Umegaki relative entropy ``Tr[rho (ln rho - ln gamma)]``.

    Returns ``math.inf`` when ``rho`` has weight outside the support of
    ``gamma``.
    """
    r = check_state(rho)
    g = check_state(gamma)
    rw, _ = _psd_spectrum(r)
    gdec = _psd_spectrum(g)
    gw, gv = gdec.eigenvalues, gdec.eigenvectors
    on = gw > cutoff * gw[0]
    weights = np.einsum("ij,jk,ki->i", gv.conj().T, r, gv).real
    if np.sum(weights[~on]) > cutoff:
        return math.inf
    pos = rw > 0
    ent = float(np.sum(rw[pos] * np.log(rw[pos])))
    cross = float(np.sum(weights[on] * np.log(gw[on])))
    return ent - cross


def fix_global_phase(u: np.ndarray) -> np.ndarray:
    """Rotate ``u`` so the first nonzero entry of column 0 is real-positive."""
    col = u[:, 0]
    nz = np.flatnonzero(np.abs(col) > 1e-12)
    if nz.size == 0:
        return u
    return u * (abs(col[nz[0]]) / col[nz[0]])


def phase_distance(u, v) -> float:
    """``min_alpha || e^{i alpha} v - u ||_F``."""
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"{u.shape} vs {v.shape}")
    ip = np.vdot(v, u)
    ph = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(u - ph * v))


def unitarity_error(u) -> float:
    u = as_matrix(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the Ginibre ensemble."""
    k = n if rank is None else rank
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
