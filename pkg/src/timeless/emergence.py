"""Observer memory records inside a history state, and the entanglement arrow.

The rest is an observer memory of ``N`` registers plus an observed system with
``d_A`` eigenstates ``|A_1> .. |A_{d_A}>``. Each register holds ``0`` (blank) or
``j + 1`` ("Saw A_{j+1}"); the observed holds ``j`` for ``|A_{j+1}>``.

A memory of 100 registers cannot be stored densely, so states are kept as
sparse maps from basis configurations ``(r_1, ..., r_N, a)`` to amplitudes.
Every step permutes basis configurations, so sparsity is preserved exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qla
from .clock import FiniteClock
from .errors import ClockError, ContractError, ModelViolation, UndefinedRelativeState
from .universe import HistoryState

BLANK = 0
AMPLITUDE_TOL = 1e-14


def symbol_name(value: int) -> str:
    return "b" if value == BLANK else f"Saw A_{value}"


@dataclass(frozen=True)
class ObserverModel:
    """``steps`` registers of dimension ``symbols + 1`` and an observed of dimension ``symbols``.

    ``permutation[j]`` is the observed symbol after one step from symbol ``j``
    (cyclic shift by default); ``initial`` are the amplitudes of the observed
    at time zero (``|A_1>`` by default).
    """

    steps: int
    symbols: int
    permutation: tuple = None
    initial: tuple = None

    def __post_init__(self):
        if self.steps < 0 or self.symbols < 1:
            raise ValueError("need steps >= 0 and symbols >= 1")
        if self.permutation is None:
            object.__setattr__(self, "permutation", tuple((j + 1) % self.symbols for j in range(self.symbols)))
        elif sorted(self.permutation) != list(range(self.symbols)):
            raise ValueError(f"{self.permutation} is not a permutation of {self.symbols} symbols")
        if self.initial is None:
            object.__setattr__(self, "initial", (1.0,) + (0.0,) * (self.symbols - 1))
        amps = np.asarray(self.initial, dtype=complex)
        if amps.shape != (self.symbols,) or not np.any(amps):
            raise ValueError("initial amplitudes must be a nonzero vector of length symbols")
        object.__setattr__(self, "initial", tuple(amps / np.linalg.norm(amps)))

    @property
    def register_dim(self) -> int:
        return self.symbols + 1

    @property
    def rest_dim(self) -> int:
        return self.register_dim ** self.steps * self.symbols


@dataclass(frozen=True)
class HistoryRecord:
    step: int
    memory: tuple
    observed: int
    amplitude: complex

    @property
    def memory_contents(self) -> list[str]:
        return [symbol_name(v) for v in self.memory]

    @property
    def observed_symbol(self) -> str:
        return f"A_{self.observed + 1}"


@dataclass
class RecordState:
    """Sparse state of memory (x) observed."""

    amplitudes: dict
    steps: int
    symbols: int

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    def configurations(self):
        return sorted(c for c, a in self.amplitudes.items() if abs(a) > AMPLITUDE_TOL)

    def written(self) -> set:
        """Register positions (1-based) that are non-blank in some configuration."""
        out = set()
        for c in self.configurations():
            out.update(i + 1 for i, v in enumerate(c[:-1]) if v != BLANK)
        return out

    def to_dense(self) -> np.ndarray:
        r = self.symbols + 1
        shape = (r,) * self.steps + (self.symbols,)
        v = np.zeros(int(np.prod(shape)), dtype=complex)
        for c, a in self.amplitudes.items():
            v[np.ravel_multi_index(c, shape)] += a
        return v

    def schmidt_coefficients(self) -> np.ndarray:
        rows = {}
        for c, a in self.amplitudes.items():
            rows.setdefault(c[:-1], np.zeros(self.symbols, dtype=complex))[c[-1]] += a
        if not rows:
            return np.zeros(0)
        return np.linalg.svd(np.array(list(rows.values())), compute_uv=False)

    def entanglement_entropy(self) -> float:
        """Entropy in bits between the memory and the observed."""
        return qla.entropy_from_schmidt(self.schmidt_coefficients())

    def approx_equal(self, other: "RecordState", tol: float = 1e-12) -> bool:
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(abs(self.amplitudes.get(k, 0) - other.amplitudes.get(k, 0)) <= tol for k in keys)


def initial_state(model: ObserverModel) -> RecordState:
    blank = (BLANK,) * model.steps
    amps = {blank + (j,): complex(a) for j, a in enumerate(model.initial) if abs(a) > AMPLITUDE_TOL}
    return RecordState(amps, model.steps, model.symbols)


def record_step(state: RecordState, model: ObserverModel, k: int) -> RecordState:
    """Copy the observed symbol into register ``k`` (1-based), then permute the observed.

    Registers ``1..k-1`` must already be written and register ``k`` must be blank.
    """
    if not 1 <= k <= model.steps:
        raise ModelViolation(f"step {k} outside 1..{model.steps}")
    if (state.steps, state.symbols) != (model.steps, model.symbols):
        raise ContractError("state does not belong to this observer model")
    out = {}
    perm = model.permutation
    for c, a in state.amplitudes.items():
        if abs(a) <= AMPLITUDE_TOL:
            continue
        regs = list(c[:-1])
        if regs[k - 1] != BLANK:
            raise ModelViolation(f"register {k} is already written")
        if any(v == BLANK for v in regs[: k - 1]):
            raise ModelViolation(f"registers before {k} are not all written")
        obs = c[-1]
        regs[k - 1] = obs + 1
        key = tuple(regs) + (perm[obs],)
        out[key] = out.get(key, 0) + a
    return RecordState(out, state.steps, state.symbols)


def record_unitary(model: ObserverModel, k: int) -> np.ndarray:
    """Dense permutation matrix extending :func:`record_step` to the whole space.

    Each pair (register ``k`` blank, observed ``a``) <-> (register ``k`` = ``a+1``,
    observed ``perm[a]``) is swapped; all other configurations are fixed. Only
    for small models.
    """
    shape = (model.register_dim,) * model.steps + (model.symbols,)
    n = int(np.prod(shape))
    perm = model.permutation
    u = np.zeros((n, n))
    for idx in range(n):
        c = list(np.unravel_index(idx, shape))
        reg, obs = c[k - 1], c[-1]
        if reg == BLANK:
            c[k - 1], c[-1] = obs + 1, perm[obs]
        elif perm[reg - 1] == obs:
            c[k - 1], c[-1] = BLANK, reg - 1
        u[np.ravel_multi_index(tuple(c), shape), idx] = 1.0
    return u


def branch_sequence(model: ObserverModel) -> list[RecordState]:
    """States after ``0, 1, ..., N`` record steps."""
    states = [initial_state(model)]
    for k in range(1, model.steps + 1):
        states.append(record_step(states[-1], model, k))
    return states


def branch_records(state: RecordState, step: int) -> list[HistoryRecord]:
    return [HistoryRecord(step, c[:-1], c[-1], state.amplitudes[c]) for c in state.configurations()]


@dataclass
class RecordHistory:
    """Universe ``sum_k w_k |t_k> |branch_k>`` over an ideal clock.

    Stored in the orthonormal basis (clock hand) x (configuration), so the
    relative state at hand ``k`` is read off by projecting onto ``|t_k>``.
    """

    clock: FiniteClock
    model: ObserverModel
    weights: np.ndarray
    amplitudes: dict = field(repr=False)

    def relative_state(self, k: int) -> RecordState:
        amps = {c: a for (hand, c), a in self.amplitudes.items() if hand == k}
        weight = sum(abs(a) ** 2 for a in amps.values())
        if weight <= AMPLITUDE_TOL:
            raise UndefinedRelativeState(k, weight)
        s = np.sqrt(weight)
        return RecordState({c: a / s for c, a in amps.items()}, self.model.steps, self.model.symbols)

    @property
    def labels(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(np.abs(self.weights) > 0)]

    def to_history_state(self) -> HistoryState:
        """Dense equivalent (small models only)."""
        d_r = self.model.rest_dim
        branches = np.zeros((self.clock.d, d_r), dtype=complex)
        for k in self.labels:
            branches[k] = self.relative_state(k).to_dense()
        psi = np.einsum("k,ka,kr->ar", self.weights, self.clock.states, branches).reshape(-1)
        return HistoryState(psi, self.weights.copy(), branches, self.clock, None, "record")


def build_history_universe(model: ObserverModel, clock: FiniteClock) -> RecordHistory:
    """Encode the whole record sequence statically: branch ``k`` is the state after ``k`` steps."""
    if clock.kind != "ideal":
        raise ClockError("record universes use an ideal clock")
    if clock.d < model.steps + 1:
        raise ClockError(f"clock with {clock.d} hands cannot hold {model.steps + 1} branches")
    weights = np.zeros(clock.d, dtype=complex)
    weights[: model.steps + 1] = 1 / np.sqrt(model.steps + 1)
    amps = {}
    for k, branch in enumerate(branch_sequence(model)):
        for c, a in branch.amplitudes.items():
            amps[(k, c)] = weights[k] * a
    return RecordHistory(clock, model, weights, amps)


def records_consistent(state: RecordState, model: ObserverModel, k: int) -> bool:
    """Branch ``k`` holds records of steps ``1..k`` in order, blanks after, observed advanced ``k`` times."""
    perm = model.permutation
    for c in state.configurations():
        regs, obs = c[:-1], c[-1]
        if any(v == BLANK for v in regs[:k]) or any(v != BLANK for v in regs[k:]):
            return False
        if k == 0:
            continue
        a = regs[0] - 1
        for v in regs[:k]:
            if v != a + 1:
                return False
            a = perm[a]
        if obs != a:
            return False
    return True


def meta_time_reordering_check(hist: RecordHistory, order, tol: float = 1e-12) -> bool:
    """Visiting the labels in any order, or skipping some, changes no branch.

    Branches are read in natural order, in ``order``, and along every other
    element of ``order``; each read must agree and each branch ``k`` must hold
    exactly the records of steps ``1..k``.
    """
    labels = hist.labels
    order = [int(k) for k in order]
    if sorted(order) != labels:
        raise ValueError("order must be a permutation of the history labels")
    natural = {k: hist.relative_state(k) for k in labels}
    for k, state in natural.items():
        if not records_consistent(state, hist.model, k):
            return False
    for visit in (order, order[::2]):
        for k in visit:
            if not hist.relative_state(k).approx_equal(natural[k], tol):
                return False
    return True


def entanglement_monotone(hist: RecordHistory, bipartition: str = "observer|observed") -> np.ndarray:
    """Memory-observed entanglement entropy (bits) of each branch, in label order."""
    if bipartition != "observer|observed":
        raise ValueError(f"unsupported bipartition {bipartition!r}")
    return np.array([hist.relative_state(k).entanglement_entropy() for k in hist.labels])
