"""Finite clocks: the discrete Fourier (ideal) clock and the exponential-overlap clock."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qla
from .errors import ClockError


@dataclass(frozen=True)
class FiniteClock:
    """A clock subsystem and its hands.

    ``states[k]`` is the hand ``|t_k>`` read at time ``times[k]``. Ideal clocks
    carry the generating Hamiltonian; exponential-overlap clocks do not.
    """

    d: int
    times: np.ndarray
    states: np.ndarray
    kind: str = "ideal"
    energy_step: float | None = None
    hamiltonian: np.ndarray | None = None
    gamma: float | None = None
    spacing: float = field(default=0.0)

    @property
    def gram(self) -> np.ndarray:
        return self.states.conj() @ self.states.T

    @property
    def is_orthonormal(self) -> bool:
        return self.kind == "ideal"

    def hand(self, k: int) -> np.ndarray:
        return self.states[k]


def ideal_finite_clock(d: int, energy_step: float = 1.0) -> FiniteClock:
    """Clock with ``H_C = diag(0, dE, ..., (d-1) dE)`` and Fourier hands.

    The hands are ``|t_k> = d^{-1/2} sum_n exp(-i eps_n t_k) |eps_n>`` with
    ``t_k = 2 pi k / (d dE)``, so that ``|t_k> = exp(-i H_C t_k) |t_0>`` and the
    hands are orthonormal.
    """
    if int(d) != d or d < 2:
        raise ClockError(f"clock dimension must be an integer >= 2, got {d}")
    if not energy_step > 0:
        raise ClockError(f"energy step must be positive, got {energy_step}")
    d = int(d)
    energies = energy_step * np.arange(d)
    times = 2 * np.pi * np.arange(d) / (d * energy_step)
    states = np.exp(-1j * np.outer(times, energies)) / np.sqrt(d)
    return FiniteClock(
        d=d,
        times=times,
        states=states,
        kind="ideal",
        energy_step=float(energy_step),
        hamiltonian=np.diag(energies).astype(complex),
        spacing=float(times[1] - times[0]),
    )


def generated_clock(hamiltonian, initial, times) -> FiniteClock:
    """Hands ``exp(-i H t_k) |t_0>`` for an arbitrary clock Hamiltonian.

    The hands must come out orthonormal; this is how a qubit with ``H_C = sigma_z``
    and ``|t_0> = |+>`` becomes a two-hand clock at ``t = 0, pi/2``.
    """
    h = qla.require_hermitian(hamiltonian, "clock Hamiltonian")
    t0 = qla.normalize(initial)
    times = np.asarray(times, dtype=float)
    states = np.array([qla.expm_hermitian(h, t) @ t0 for t in times])
    if len(times) != h.shape[0] or not np.allclose(states.conj() @ states.T, np.eye(len(times)), atol=1e-10):
        raise ClockError("generated hands are not an orthonormal basis")
    steps = np.diff(times)
    return FiniteClock(d=len(times), times=times, states=states, kind="ideal", hamiltonian=h,
                       spacing=float(steps[0]) if steps.size else 0.0)


def overlap_gram(d: int, gamma: float, spacing: float) -> np.ndarray:
    n = np.arange(d)
    return np.exp(-gamma * spacing * np.abs(np.subtract.outer(n, n)))


def gaussian_clock(d: int, gamma: float, spacing: float = 1.0) -> FiniteClock:
    """Clock whose hands overlap as ``<t_n|t_m> = exp(-gamma |t_n - t_m|)``.

    Hands are the rows of the Cholesky factor of the Gram matrix, living in a
    ``d``-dimensional space. Times are ``t_n = n * spacing``.
    """
    if int(d) != d or d < 2:
        raise ClockError(f"clock dimension must be an integer >= 2, got {d}")
    if not gamma > 0 or not spacing > 0:
        raise ClockError(f"gamma and spacing must be positive, got {gamma}, {spacing}")
    d = int(d)
    g = overlap_gram(d, gamma, spacing)
    lam_min = float(np.linalg.eigvalsh(g)[0])
    if lam_min <= 0:
        raise ClockError(f"overlap matrix is not positive definite (smallest eigenvalue {lam_min:.3e})")
    try:
        factor = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise ClockError(f"overlap matrix factorization failed (smallest eigenvalue {lam_min:.3e})") from exc
    return FiniteClock(
        d=d,
        times=spacing * np.arange(d),
        states=factor.astype(complex),
        kind="gaussian",
        gamma=float(gamma),
        spacing=float(spacing),
    )


def conjugate_clock(clock: FiniteClock, p: np.ndarray) -> FiniteClock:
    """The same clock described after a local change of basis ``P`` on the clock factor.

    Hands become ``P^dagger |t_k>`` and ``H_C`` becomes ``P^dagger H_C P``, matching
    how states and operators transform under a change of tensor-product structure.
    """
    p = np.asarray(p, dtype=complex)
    if p.shape != (clock.d, clock.d) or not qla.is_unitary(p):
        raise ClockError("local clock map must be a d x d unitary")
    pd = p.conj().T
    h = None if clock.hamiltonian is None else pd @ clock.hamiltonian @ p
    return FiniteClock(
        d=clock.d,
        times=clock.times,
        states=clock.states @ pd.T,
        kind=clock.kind,
        energy_step=clock.energy_step,
        hamiltonian=h,
        gamma=clock.gamma,
        spacing=clock.spacing,
    )


@dataclass(frozen=True)
class ClockObservable:
    matrix: np.ndarray
    values: np.ndarray
    commutator_defect: float


def clock_observable(clock: FiniteClock) -> ClockObservable:
    """``T_C = sum_k t_k |t_k><t_k|`` for an ideal clock.

    In finite dimension ``[H_C, T_C] = i`` cannot hold; the Frobenius norm of
    ``[H_C, T_C] - i I`` is returned as a diagnostic.
    """
    if clock.kind != "ideal":
        raise ClockError("clock observable requires orthogonal hands (ideal clock)")
    s = clock.states
    t_c = (s.T * clock.times) @ s.conj()
    defect = np.linalg.norm(qla.commutator(clock.hamiltonian, t_c) - 1j * np.eye(clock.d))
    return ClockObservable(matrix=t_c, values=clock.times.copy(), commutator_defect=float(defect))
