"""Finite-dimensional simulation of relational (clock-conditioned) quantum time."""

__version__ = "0.1.0"

from . import clock, emergence, qla, relstate, tps, universe  # noqa: E402
from .clock import FiniteClock, gaussian_clock, ideal_finite_clock  # noqa: E402
from .universe import HistoryState, history_state, total_hamiltonian  # noqa: E402
