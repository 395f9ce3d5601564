"""Relative states of the rest conditioned on clock hands.

The relative state for hand ``|t>`` is ``Tr_C[P_t rho] / Tr[P_t rho]`` with the
rank-one ``P_t = |t><t|``, orthogonal or not.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qla
from .clock import FiniteClock
from .errors import ContractError, DimensionError, InsufficientGridError, UndefinedRelativeState
from .universe import HistoryState

SUPPORT_TOL = 1e-14
PURE_TOL = 1e-8


def _unnormalized(state, hand, d_c):
    state = np.asarray(state, dtype=complex)
    n = state.shape[0]
    if n % d_c:
        raise DimensionError(f"universe dimension {n} is not a multiple of clock dimension {d_c}")
    d_r = n // d_c
    if state.ndim == 1:
        chi = hand.conj() @ state.reshape(d_c, d_r)
        return np.outer(chi, chi.conj())
    r = state.reshape(d_c, d_r, d_c, d_r)
    return np.einsum("a,arbs,b->rs", hand.conj(), r, hand)


def relative_state(state, clock: FiniteClock, k: int) -> np.ndarray:
    """Density operator of the rest given that the clock reads hand ``k``.

    ``state`` is a universe vector or density operator on ``d_C * d_R``.
    """
    sigma = _unnormalized(state, clock.states[k], clock.d)
    weight = float(np.trace(sigma).real)
    if weight <= SUPPORT_TOL:
        raise UndefinedRelativeState(k, weight)
    return sigma / weight


@dataclass
class RelativeStateFamily:
    indices: np.ndarray
    times: np.ndarray
    rhos: np.ndarray
    purities: np.ndarray
    gaps: list = field(default_factory=list)
    source: object = None

    def __len__(self):
        return len(self.indices)

    @property
    def is_pure(self) -> bool:
        return bool(np.all(self.purities >= 1 - PURE_TOL))


def relative_family(hist: HistoryState, mixture: bool = False) -> RelativeStateFamily:
    """Relative state at every clock hand of ``hist``.

    Hands without support are listed in ``gaps``. With ``mixture=True`` the
    branch-incoherent universe :meth:`HistoryState.mixture` is conditioned instead.
    """
    state = hist.mixture() if mixture else hist.psi
    return family_from_state(state, hist.clock, source=hist)


def family_from_state(state, clock: FiniteClock, source=None) -> RelativeStateFamily:
    indices, rhos, gaps = [], [], []
    for k in range(clock.d):
        try:
            rhos.append(relative_state(state, clock, k))
            indices.append(k)
        except UndefinedRelativeState:
            gaps.append(k)
    indices = np.array(indices, dtype=int)
    rhos = np.array(rhos)
    purities = np.array([qla.purity(r) for r in rhos])
    return RelativeStateFamily(indices, clock.times[indices], rhos, purities, gaps, source)


def schrodinger_residual(family: RelativeStateFamily, rest_hamiltonian) -> np.ndarray:
    """Central-difference defect ``||(rho_{k+1} - rho_{k-1}) / 2dt - i[rho_k, H_R]||_F``.

    Evaluated at every interior hand whose neighbours are both present; the
    time grid must be uniform.
    """
    h = np.asarray(rest_hamiltonian, dtype=complex)
    idx = family.indices
    interior = [j for j in range(1, len(idx) - 1) if idx[j - 1] == idx[j] - 1 and idx[j + 1] == idx[j] + 1]
    if not interior:
        raise InsufficientGridError("need at least three consecutive relative states")
    t = family.times
    steps = np.diff(t) / np.diff(idx)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise InsufficientGridError("time grid is not uniform")
    out = np.empty(len(interior))
    for n, j in enumerate(interior):
        dt = t[j + 1] - t[j - 1]
        lhs = (family.rhos[j + 1] - family.rhos[j - 1]) / dt
        rho = family.rhos[j]
        out[n] = np.linalg.norm(lhs - 1j * (rho @ h - h @ rho))
    return out


def leading_state(rho) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    return v[:, -1]


def orbit_fidelities(family: RelativeStateFamily, rest_hamiltonian) -> np.ndarray:
    """Fidelity of each relative state with ``exp(-i H_R (t_k - t_first)) phi_first``.

    ``phi_first`` is the leading eigenvector of the first relative state present.
    """
    if len(family) == 0:
        raise ContractError("empty relative-state family")
    w, v = qla.eig_hermitian(rest_hamiltonian)
    phi0 = leading_state(family.rhos[0])
    c0 = v.conj().T @ phi0
    dts = family.times - family.times[0]
    orbit = (np.exp(-1j * np.outer(dts, w)) * c0) @ v.T
    return np.array([qla.fidelity(phi, rho) for phi, rho in zip(orbit, family.rhos)])


def unitary_evolution_fidelity(family: RelativeStateFamily, rest_hamiltonian) -> float:
    """Worst orbit fidelity of a pure family; mixed families are rejected."""
    if len(family) and not family.is_pure:
        raise ContractError(f"family is mixed (min purity {family.purities.min():.6f})")
    return float(orbit_fidelities(family, rest_hamiltonian).min())
