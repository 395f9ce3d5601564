"""Changes of tensor-product structure and the clock-ambiguity experiment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qla
from .clock import FiniteClock
from .errors import ConstraintError, ContractError, DimensionError, InsufficientGridError
from .relstate import RelativeStateFamily, family_from_state, schrodinger_residual, unitary_evolution_fidelity
from .universe import UniverseHamiltonian, constraint_residual

SCHMIDT_REL_TOL = 1e-8
KERNEL_PRECONDITION = 1e-8


@dataclass(frozen=True)
class TPSMap:
    """Unitary ``W`` re-identifying the space with a new clock (x) rest split.

    ``clock_factor`` and ``rest_factor`` hold the local part of ``W`` when it
    is known (``P`` and ``Q`` for ``W = P (x) Q``, ``exp(-i W_C)`` and
    ``exp(-i W_R)`` for a sampled generator).
    """

    W: np.ndarray
    partition: tuple[int, int]
    locality: str = "unknown"
    strength: float = 0.0
    clock_factor: np.ndarray | None = None
    rest_factor: np.ndarray | None = None

    def __post_init__(self):
        d_c, d_r = self.partition
        if self.W.shape != (d_c * d_r, d_c * d_r):
            raise DimensionError(f"W has shape {self.W.shape} for partition {self.partition}")
        if not qla.is_unitary(self.W):
            raise ContractError("TPS map must be unitary")


def identity_tps(partition) -> TPSMap:
    d_c, d_r = partition
    return TPSMap(np.eye(d_c * d_r, dtype=complex), (d_c, d_r), "local", 0.0,
                  np.eye(d_c, dtype=complex), np.eye(d_r, dtype=complex))


def local_tps(p, q) -> TPSMap:
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    return TPSMap(np.kron(p, q), (p.shape[0], q.shape[0]), "local", 0.0, p, q)


def apply_tps(tps: TPSMap, x) -> np.ndarray:
    """Describe a state (``W^dagger psi``) or operator (``W^dagger H W``) in the new split."""
    x = np.asarray(x, dtype=complex)
    w = tps.W
    if x.shape[0] != w.shape[0]:
        raise DimensionError(f"operand dimension {x.shape[0]} vs map dimension {w.shape[0]}")
    if x.ndim == 1:
        return w.conj().T @ x
    return w.conj().T @ x @ w


@dataclass(frozen=True)
class LocalDecomposition:
    offset: float
    H_A: np.ndarray
    H_B: np.ndarray
    H_int: np.ndarray
    partition: tuple[int, int]

    @property
    def interaction_norm(self) -> float:
        return float(np.linalg.norm(self.H_int))

    def reconstruct(self) -> np.ndarray:
        d_a, d_b = self.partition
        return (self.offset * np.eye(d_a * d_b) + np.kron(self.H_A, np.eye(d_b))
                + np.kron(np.eye(d_a), self.H_B) + self.H_int)


def decompose_local(h, partition) -> LocalDecomposition:
    """Unique split ``H = c I + H_A (x) I + I (x) H_B + H_int`` with traceless parts.

    ``H_A``, ``H_B`` are traceless and both partial traces of ``H_int`` vanish.
    """
    h = qla.require_hermitian(h)
    d_a, d_b = partition
    n = d_a * d_b
    if h.shape[0] != n:
        raise DimensionError(f"operator of dimension {h.shape[0]} vs partition {partition}")
    c0 = float(np.trace(h).real) / n
    shifted = h - c0 * np.eye(n)
    h_a = qla.partial_trace(shifted, partition, keep="A") / d_b
    h_b = qla.partial_trace(shifted, partition, keep="B") / d_a
    h_int = shifted - np.kron(h_a, np.eye(d_b)) - np.kron(np.eye(d_a), h_b)
    return LocalDecomposition(c0, h_a, h_b, h_int, (d_a, d_b))


def interaction_norm(h, partition) -> float:
    return decompose_local(h, partition).interaction_norm


def is_local_product(tps: TPSMap, tol: float = SCHMIDT_REL_TOL) -> bool:
    """True iff ``W = e^{i theta} P (x) Q`` (operator-Schmidt rank 1)."""
    return qla.operator_schmidt_rank(tps.W, tps.partition, tol) == 1


def random_coupling(partition, rng: np.random.Generator) -> np.ndarray:
    """Hermitian coupling with vanishing marginals, unit spectral norm."""
    d_a, d_b = partition
    x = qla.random_hermitian(d_a * d_b, rng)
    h_int = decompose_local(x, partition).H_int
    return h_int / np.linalg.norm(h_int, 2)


def random_tps(partition, locality: str = "nonlocal", strength: float = 0.5, seed: int = 0) -> TPSMap:
    """Seeded TPS change.

    ``local`` samples Haar ``P (x) Q``. ``nonlocal`` samples
    ``W = exp(-i (W_C (x) I + I (x) W_R + strength * W_CR))`` from unit-norm GUE
    generators and a marginal-free coupling ``W_CR``.
    """
    if strength < 0:
        raise ValueError("strength must be non-negative")
    d_c, d_r = partition
    rng = np.random.default_rng(seed)
    if locality == "local":
        return local_tps(qla.random_unitary(d_c, rng), qla.random_unitary(d_r, rng))
    if locality != "nonlocal":
        raise ValueError(f"locality must be 'local' or 'nonlocal', got {locality!r}")
    w_c = qla.random_hermitian(d_c, rng)
    w_r = qla.random_hermitian(d_r, rng)
    w_cr = random_coupling(partition, rng)
    gen = np.kron(w_c, np.eye(d_r)) + np.kron(np.eye(d_c), w_r) + strength * w_cr
    w = qla.expm_hermitian(gen, 1.0)
    return TPSMap(w, (d_c, d_r), "nonlocal", float(strength),
                  qla.expm_hermitian(w_c, 1.0), qla.expm_hermitian(w_r, 1.0))


@dataclass
class AmbiguityReport:
    interaction_norm: float
    min_fidelity: float
    max_residual: float
    is_local: bool
    rest_hamiltonian: np.ndarray
    family: RelativeStateFamily

    def distinguishes(self, tol_int: float = 1e-9, tol_fid: float = 1e-8) -> bool:
        """Whether the new split is visibly interacting and not unitarily generated."""
        return self.interaction_norm > tol_int and self.min_fidelity < 1 - tol_fid


def clock_ambiguity_experiment(
    universe: UniverseHamiltonian,
    psi,
    tps: TPSMap,
    clock: FiniteClock,
) -> AmbiguityReport:
    """Redescribe a stationary universe in a new split and test its rest dynamics.

    ``clock`` gives the hands of the new clock in the new coordinates. The
    relative family is compared with the orbit of the new local rest
    Hamiltonian ``H_B`` of :func:`decompose_local`.
    """
    psi = np.asarray(psi, dtype=complex)
    res = constraint_residual(psi, universe)
    if res > KERNEL_PRECONDITION:
        raise ConstraintError(f"universe state is not stationary (residual {res:.3e})")
    d_c, d_r = tps.partition
    if clock.d != d_c:
        raise DimensionError(f"clock dimension {clock.d} vs new clock factor {d_c}")
    h_new = apply_tps(tps, universe.matrix)
    psi_new = apply_tps(tps, psi)
    dec = decompose_local(h_new, tps.partition)
    family = family_from_state(psi_new, clock)
    if family.is_pure:
        fid = unitary_evolution_fidelity(family, dec.H_B)
    else:
        fid = float("nan")
    try:
        resid = float(schrodinger_residual(family, dec.H_B).max())
    except InsufficientGridError:
        resid = float("nan")
    return AmbiguityReport(dec.interaction_norm, fid, resid, is_local_product(tps), dec.H_B, family)
