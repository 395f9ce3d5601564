"""Dense complex linear algebra for finite-dimensional quantum systems.

States are 1-d complex arrays, operators are square 2-d complex arrays. In a
bipartite space the left factor is the slow index, so ``np.kron(a, b)`` is the
tensor product and a state on ``(d_a, d_b)`` reshapes to ``(d_a, d_b)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as la

from .errors import ContractError, DimensionError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
KERNEL_TOL = 1e-10
ZERO_EIGENVALUE = 1e-14
PSD_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class Spectrum(NamedTuple):
    """Ascending eigenvalues and the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def ket(index: int, dim: int) -> np.ndarray:
    """Computational basis vector ``|index>`` of dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ContractError("cannot normalize the zero vector")
    return v / n


def density(psi) -> np.ndarray:
    """Projector ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def _square(m, name="operator") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(m) -> float:
    m = np.asarray(m)
    return float(np.linalg.norm(m - m.conj().T))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    """``||M - M^dagger||_F <= tol``, scaled by ``||M||_F`` once that exceeds 1."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return hermiticity_defect(m) <= tol * max(1.0, float(np.linalg.norm(m)))


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]))) <= tol


def require_hermitian(m, name="operator") -> np.ndarray:
    """Validate and return the exactly symmetrized matrix."""
    m = _square(m, name)
    if not is_hermitian(m):
        raise ContractError(f"{name} is not Hermitian (defect {hermiticity_defect(m):.3e})")
    return (m + m.conj().T) / 2


def tensor(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the slow index.

    Works for two vectors or two matrices; mixing kinds is rejected.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise DimensionError(f"cannot tensor arrays of ndim {a.ndim} and {b.ndim}")
    return np.kron(a, b)


def _check_dims(n, dims):
    d_a, d_b = (int(x) for x in dims)
    if d_a < 1 or d_b < 1 or d_a * d_b != n:
        raise DimensionError(f"partition {dims} does not match dimension {n}")
    return d_a, d_b


def partial_trace(rho, dims, keep: str = "A") -> np.ndarray:
    """Trace out one factor of an operator on ``d_A * d_B``.

    ``keep`` is ``"A"`` (trace over B) or ``"B"`` (trace over A). The operator
    need not be a density matrix; the map is linear.
    """
    rho = _square(rho)
    d_a, d_b = _check_dims(rho.shape[0], dims)
    r = rho.reshape(d_a, d_b, d_a, d_b)
    if keep.upper() == "A":
        return np.einsum("ibjb->ij", r)
    if keep.upper() == "B":
        return np.einsum("aiaj->ij", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def reduced_state(psi, dims, keep: str = "A") -> np.ndarray:
    """Reduced density matrix of a pure bipartite state, without forming ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex)
    d_a, d_b = _check_dims(psi.shape[0], dims)
    m = psi.reshape(d_a, d_b)
    if keep.upper() == "A":
        return m @ m.conj().T
    if keep.upper() == "B":
        return m.T @ m.conj()
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def eig_hermitian(h) -> Spectrum:
    """Spectral decomposition with ascending eigenvalues."""
    h = require_hermitian(h)
    w, v = np.linalg.eigh(h)
    return Spectrum(w, v)


def expm_hermitian(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` through the spectral decomposition of ``h``."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def kernel_basis(h, tol: float = KERNEL_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the eigenspace with ``|lambda| <= tol * ||h||_F``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    w, v = eig_hermitian(h)
    cutoff = tol * float(np.linalg.norm(h))
    return [v[:, i].copy() for i in np.flatnonzero(np.abs(w) <= cutoff)]


def _psd_sqrt(rho) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.where(w > ZERO_EIGENVALUE, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a, b) -> float:
    """Phase-insensitive overlap of two states.

    Vectors give ``|<a|b>|^2``; density matrices give ``(Tr sqrt(sqrt(a) b sqrt(a)))^2``.
    A vector against a density matrix gives ``<a|rho|a>``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 1 and b.ndim == 1:
        f = abs(np.vdot(a, b)) ** 2
    elif a.ndim == 1:
        f = np.vdot(a, b @ a).real
    elif b.ndim == 1:
        f = np.vdot(b, a @ b).real
    else:
        s = _psd_sqrt(a)
        m = s @ b @ s
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        f = np.sum(np.sqrt(w[w > ZERO_EIGENVALUE])) ** 2
    return float(min(max(f, 0.0), 1.0))


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.vdot(rho.conj().T, rho)))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues below ``1e-14`` count as exact zeros."""
    rho = require_hermitian(rho, "density operator")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -PSD_TOL:
        raise ContractError(f"density operator has negative eigenvalue {w.min():.3e}")
    w = w[w > ZERO_EIGENVALUE]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def schmidt_coefficients(psi, dims) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    d_a, d_b = _check_dims(psi.shape[0], dims)
    return np.linalg.svd(psi.reshape(d_a, d_b), compute_uv=False)


def entropy_from_schmidt(s) -> float:
    p = np.asarray(s, dtype=float) ** 2
    p = p / p.sum()
    p = p[p > ZERO_EIGENVALUE]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def entanglement_entropy(psi, dims) -> float:
    """Entropy of either reduced state of a pure bipartite vector."""
    return entropy_from_schmidt(schmidt_coefficients(psi, dims))


def realign(op, dims) -> np.ndarray:
    """Reshuffle ``op`` on ``A (x) B`` so that ``A (x) B -> vec(A) vec(B)^T``."""
    op = _square(op)
    d_a, d_b = _check_dims(op.shape[0], dims)
    r = op.reshape(d_a, d_b, d_a, d_b).transpose(0, 2, 1, 3)
    return r.reshape(d_a * d_a, d_b * d_b)


def operator_schmidt_values(op, dims) -> np.ndarray:
    """Operator-Schmidt coefficients normalized by ``||op||_F`` (squares sum to 1)."""
    s = np.linalg.svd(realign(op, dims), compute_uv=False)
    norm = np.linalg.norm(s)
    return s / norm if norm > 0 else s


def operator_schmidt_rank(op, dims, rel_tol: float = 1e-8) -> int:
    s = operator_schmidt_values(op, dims)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """GUE sample rescaled to spectral norm ``scale``."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    n = np.linalg.norm(h, 2)
    return h * (scale / n) if n > 0 else h


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = la.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))
