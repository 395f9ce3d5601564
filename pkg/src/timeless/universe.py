"""Stationary clock (x) rest universes and history states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qla
from .clock import FiniteClock
from .errors import ClockError, ConstraintError, ContractError, DimensionError

STATIONARY_TOL = 1e-9


@dataclass(frozen=True)
class UniverseHamiltonian:
    clock_hamiltonian: np.ndarray
    rest_hamiltonian: np.ndarray
    matrix: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.clock_hamiltonian.shape[0], self.rest_hamiltonian.shape[0]


def total_hamiltonian(h_c, h_r) -> UniverseHamiltonian:
    """Non-interacting ``H = H_C (x) I + I (x) H_R``."""
    h_c = qla.require_hermitian(h_c, "clock Hamiltonian")
    h_r = qla.require_hermitian(h_r, "rest Hamiltonian")
    d_c, d_r = h_c.shape[0], h_r.shape[0]
    h = np.kron(h_c, np.eye(d_r)) + np.kron(np.eye(d_c), h_r)
    return UniverseHamiltonian(h_c, h_r, h)


def constraint_residual(psi, universe: UniverseHamiltonian) -> float:
    """``||H psi||``; zero certifies that ``psi`` is stationary with zero energy."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != universe.matrix.shape[0]:
        raise DimensionError(f"state of dimension {psi.shape[0]} vs universe {universe.matrix.shape[0]}")
    return float(np.linalg.norm(universe.matrix @ psi))


def zero_eigenspace_dimension(universe: UniverseHamiltonian, tol: float = qla.KERNEL_TOL) -> int:
    return len(qla.kernel_basis(universe.matrix, tol))


def lattice_rest_hamiltonian(h_r, energy_step: float, d: int) -> np.ndarray:
    """Round the spectrum of ``h_r`` onto ``energy_step * Z`` and shift its top to zero.

    With clock energies ``0..(d-1) dE`` every rest level ``-j dE``, ``0 <= j < d``,
    pairs with exactly one clock level to total energy zero. A spectral range of
    ``d`` steps or more cannot be matched and is rejected.
    """
    w, v = qla.eig_hermitian(h_r)
    levels = np.round(w / energy_step)
    levels -= levels.max()
    if -levels.min() > d - 1:
        raise ConstraintError(
            f"rest spectrum spans {int(-levels.min())} energy steps; a {d}-level clock covers at most {d - 1}"
        )
    return (v * (levels * energy_step)) @ v.conj().T


@dataclass(frozen=True)
class HistoryState:
    """``psi = sum_k weights[k] |t_k> (x) branches[k]``."""

    psi: np.ndarray
    weights: np.ndarray
    branches: np.ndarray
    clock: FiniteClock
    rest_hamiltonian: np.ndarray
    mode: str = "free"

    @property
    def dims(self) -> tuple[int, int]:
        return self.clock.d, self.branches.shape[1]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.weights) > 0)

    @property
    def is_entangled(self) -> bool:
        return self.support.size >= 2

    def universe(self) -> UniverseHamiltonian:
        if self.clock.hamiltonian is None:
            raise ClockError("clock has no generating Hamiltonian")
        return total_hamiltonian(self.clock.hamiltonian, self.rest_hamiltonian)

    def mixture(self) -> np.ndarray:
        """Branch-incoherent universe ``sum_k |w_k|^2 |t_k><t_k| (x) |phi_k><phi_k|``, trace 1."""
        rho = np.zeros((self.psi.size, self.psi.size), dtype=complex)
        p = np.abs(self.weights) ** 2
        for k in self.support:
            rho += p[k] * np.kron(qla.density(self.clock.states[k]), qla.density(self.branches[k]))
        return rho / np.trace(rho).real


def history_state(
    clock: FiniteClock,
    rest_hamiltonian,
    initial,
    weights=None,
    mode: str = "free",
) -> HistoryState:
    """Entangled history ``sum_k a_k |t_k> exp(-i H_R t_k) |phi_0>``.

    ``mode="free"`` uses ``rest_hamiltonian`` as given; the relative states follow
    it exactly but ``H psi = 0`` holds only for commensurate spectra.
    ``mode="stationary"`` first moves the rest spectrum onto the clock's energy
    lattice (see :func:`lattice_rest_hamiltonian`) and checks the constraint.
    """
    if mode not in ("free", "stationary"):
        raise ValueError(f"mode must be 'free' or 'stationary', got {mode!r}")
    h_r = qla.require_hermitian(rest_hamiltonian, "rest Hamiltonian")
    phi0 = qla.normalize(initial)
    if phi0.shape[0] != h_r.shape[0]:
        raise DimensionError(f"initial state dimension {phi0.shape[0]} vs rest dimension {h_r.shape[0]}")
    if weights is None:
        alpha = np.full(clock.d, 1 / np.sqrt(clock.d), dtype=complex)
    else:
        alpha = np.asarray(weights, dtype=complex)
        if alpha.shape != (clock.d,):
            raise DimensionError(f"need {clock.d} weights, got shape {alpha.shape}")
    if not np.any(alpha):
        raise ContractError("weight vector is zero")

    if mode == "stationary":
        if clock.kind != "ideal":
            raise ClockError("stationary universes need an ideal clock with a Hamiltonian")
        h_r = lattice_rest_hamiltonian(h_r, clock.energy_step, clock.d)

    w, v = qla.eig_hermitian(h_r)
    c0 = v.conj().T @ phi0
    branches = (np.exp(-1j * np.outer(clock.times, w)) * c0) @ v.T
    psi = np.einsum("k,ka,kr->ar", alpha, clock.states, branches).reshape(-1)
    norm = np.linalg.norm(psi)
    hist = HistoryState(psi / norm, alpha / norm, branches, clock, h_r, mode)

    if mode == "stationary":
        res = constraint_residual(hist.psi, hist.universe())
        if res > STATIONARY_TOL:
            raise ConstraintError(f"stationary history state has residual {res:.3e}")
    return hist
