"""Acceptance criteria, each run at its stated tolerance and runtime limit.

Run with ``pytest tests/test_acceptance.py`` (the PASS/FAIL lines appear in
the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import hashlib
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import energy_basis_residual  # noqa: E402
from timeless import cli, qla, scenarios  # noqa: E402
from timeless.clock import conjugate_clock, gaussian_clock, ideal_finite_clock  # noqa: E402
from timeless.emergence import (  # noqa: E402
    ObserverModel,
    branch_records,
    build_history_universe,
    entanglement_monotone,
    meta_time_reordering_check,
    records_consistent,
)
from timeless.relstate import relative_family, schrodinger_residual, unitary_evolution_fidelity  # noqa: E402
from timeless.tps import clock_ambiguity_experiment, interaction_norm, random_tps  # noqa: E402
from timeless.universe import (  # noqa: E402
    constraint_residual,
    history_state,
    total_hamiltonian,
    zero_eigenspace_dimension,
)

SEED = 20240611


@dataclass
class Outcome:
    number: int
    title: str
    clauses: dict
    elapsed: float
    limit: float | None
    note: str = ""

    @property
    def in_time(self) -> bool:
        return self.limit is None or self.elapsed < self.limit

    @property
    def passed(self) -> bool:
        return self.in_time and all(ok for ok, _ in self.clauses.values())

    def line(self) -> str:
        failed = [f"{k} ({v})" for k, (ok, v) in self.clauses.items() if not ok]
        if not self.in_time:
            failed.append(f"runtime {self.elapsed:.3f}s >= {self.limit}s")
        limit = f" < {self.limit}s" if self.limit is not None else ""
        head = f"{'PASS' if self.passed else 'FAIL'}  criterion {self.number}: {self.title} [{self.elapsed:.3f}s{limit}]"
        if failed:
            head += " failed: " + "; ".join(failed)
        if self.note:
            head += f" | {self.note}"
        return head


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1() -> Outcome:
    def body():
        u = total_hamiltonian(qla.SIGMA_Z, qla.SIGMA_Z)
        pm = (np.kron(qla.KET_PLUS, qla.KET_MINUS) + np.kron(qla.KET_MINUS, qla.KET_PLUS)) / np.sqrt(2)
        res = constraint_residual(pm, u)
        kdim = zero_eigenspace_dimension(u)
        hand = qla.KET_PLUS
        chi = hand.conj() @ pm.reshape(2, 2)
        rho = np.outer(chi, chi.conj()) / np.vdot(chi, chi).real
        fid = qla.fidelity(qla.KET_MINUS, rho)
        shifted = qla.expm_hermitian(qla.SIGMA_Z, np.pi / 2) @ qla.KET_PLUS
        shift = qla.fidelity(shifted, qla.KET_MINUS)
        return res, kdim, fid, shift

    (res, kdim, fid, shift), dt = timed(body)
    clauses = {
        "residual <= 1e-12": (res <= 1e-12, f"{res:.3g}"),
        "kernel dimension = 2": (kdim == 2, kdim),
        "rel. state |+> -> |-> fidelity 1 +- 1e-12": (abs(fid - 1) <= 1e-12, f"{fid:.17g}"),
        "shift exp(-i sz pi/2)|+> = |->": (abs(shift - 1) <= 1e-12, f"{shift:.17g}"),
    }
    note = ("(|+-> + |-+>)/sqrt2 equals (|00> - |11>)/sqrt2, which has energy +-2 components; "
            "the antisymmetric (|+-> - |-+>)/sqrt2 built by history_state is annihilated") if res > 1e-12 else ""
    return Outcome(1, "two-qubit example", clauses, dt, 0.1, note)


def criterion_2() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED)
        h_r, phi0 = qla.random_hermitian(4, rng), qla.random_state(4, rng)
        coarse = history_state(ideal_finite_clock(64), h_r, phi0)
        fam = relative_family(coarse)
        fid = unitary_evolution_fidelity(fam, h_r)
        r64 = schrodinger_residual(fam, h_r).max()
        fine = history_state(ideal_finite_clock(128), h_r, phi0)
        r128 = schrodinger_residual(relative_family(fine), h_r).max()
        return fid, r64 / r128

    (fid, ratio), dt = timed(body)
    clauses = {
        "min unitary fidelity >= 1 - 1e-10": (fid >= 1 - 1e-10, f"{1 - fid:.3g} defect"),
        "residual ratio 4 +- 25%": (abs(ratio / 4 - 1) <= 0.25, f"{ratio:.4f}"),
    }
    return Outcome(2, "emergent Schrodinger equation", clauses, dt, 5.0)


def criterion_3() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED + 3)
        v = qla.random_unitary(4, rng)
        h_r = v @ np.diag(rng.integers(-3, 4, size=4)).astype(complex) @ v.conj().T
        ck = ideal_finite_clock(16, 1.0)
        hist = history_state(ck, h_r, qla.random_state(4, rng), mode="stationary")
        res = constraint_residual(hist.psi, hist.universe())
        oracle = energy_basis_residual(hist.psi, ck.hamiltonian, hist.rest_hamiltonian)
        return res, oracle

    (res, oracle), dt = timed(body)
    clauses = {
        "constraint residual <= 1e-9": (res <= 1e-9, f"{res:.3g}"),
        "energy-basis oracle <= 1e-9": (oracle <= 1e-9, f"{oracle:.3g}"),
    }
    return Outcome(3, "stationarity on 16x4", clauses, dt, 1.0)


def criterion_4() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED + 4)
        ck = ideal_finite_clock(8, 1.0)
        hist = history_state(ck, qla.random_hermitian(4, rng, 3.0), qla.random_state(4, rng), mode="stationary")
        u = hist.universe()
        out = {}
        for locality in ("nonlocal", "local"):
            norms, fids = [], []
            for i in range(20):
                m = random_tps(hist.dims, locality, 0.5, SEED + 1000 * (locality == "local") + i)
                r = clock_ambiguity_experiment(u, hist.psi, m, conjugate_clock(ck, m.clock_factor))
                norms.append(r.interaction_norm)
                fids.append(r.min_fidelity)
            out[locality] = (np.array(norms), np.array(fids))
        return out

    out, dt = timed(body)
    nl_n, nl_f = out["nonlocal"]
    lo_n, lo_f = out["local"]
    clauses = {
        "non-local interaction_norm > 0.05": (bool(np.all(nl_n > 0.05)), f"min {nl_n.min():.4g}"),
        "non-local min fidelity < 0.99": (bool(np.all(nl_f < 0.99)), f"max {nl_f.max():.4g}"),
        "local interaction_norm <= 1e-9": (bool(np.all(lo_n <= 1e-9)), f"max {lo_n.max():.3g}"),
        "local fidelity >= 1 - 1e-8": (bool(np.all(lo_f >= 1 - 1e-8)), f"max defect {(1 - lo_f).max():.3g}"),
    }
    return Outcome(4, "no clock ambiguity, 20+20 maps on 8x4", clauses, dt, 30.0)


def criterion_5() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED + 5)
        worst = 0.0
        for _ in range(50):
            d_a, d_b = (int(x) for x in rng.integers(1, 9, size=2))
            h = qla.random_hermitian(d_a * d_b, rng, float(rng.uniform(0.5, 5)))
            p = np.kron(qla.random_unitary(d_a, rng), qla.random_unitary(d_b, rng))
            g = p.conj().T @ h @ p
            worst = max(worst, abs(interaction_norm(g, (d_a, d_b)) - interaction_norm(h, (d_a, d_b))))
        return worst

    worst, dt = timed(body)
    return Outcome(5, "local invariance of interaction norm", {"deviation <= 1e-9": (worst <= 1e-9, f"{worst:.3g}")},
                   dt, 5.0)


def criterion_6() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED + 6)
        model = ObserverModel(100, 100)
        hist = build_history_universe(model, ideal_finite_clock(101, 1.0))
        last = hist.relative_state(100)
        (rec,) = branch_records(last, 100)
        expected = [f"Saw A_{i}" for i in range(1, 101)]
        in_order = rec.memory_contents == expected and records_consistent(last, model, 100)
        passed = sum(meta_time_reordering_check(hist, rng.permutation(hist.labels)) for _ in range(100))
        return in_order, passed

    (in_order, passed), dt = timed(body)
    clauses = {
        "branch 100 holds Saw A_1..Saw A_100 in order": (in_order, in_order),
        "100 random reorderings pass": (passed == 100, f"{passed}/100"),
    }
    return Outcome(6, "observer records and meta-time", clauses, dt, 10.0)


def criterion_7() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED + 7)
        worst_drop = 0.0
        for _ in range(50):
            symbols, steps = int(rng.integers(2, 5)), int(rng.integers(1, 7))
            model = ObserverModel(steps, symbols, initial=tuple(qla.random_state(symbols, rng)))
            s = entanglement_monotone(build_history_universe(model, ideal_finite_clock(steps + 1, 1.0)))
            worst_drop = max(worst_drop, float(-np.diff(s).min()))
        eig_max = 0.0
        for symbols in range(2, 5):
            for steps in range(1, 7):
                for j in range(symbols):
                    init = tuple(np.eye(symbols)[j])
                    model = ObserverModel(steps, symbols, initial=init)
                    s = entanglement_monotone(build_history_universe(model, ideal_finite_clock(steps + 1, 1.0)))
                    eig_max = max(eig_max, float(np.abs(s).max()))
        return worst_drop, eig_max

    (drop, eig_max), dt = timed(body)
    clauses = {
        "superposed inputs nondecreasing": (drop <= 1e-12, f"largest drop {drop:.3g}"),
        "eigenstate inputs identically zero": (eig_max == 0.0, f"max {eig_max:.3g}"),
    }
    return Outcome(7, "arrow of time", clauses, dt, 5.0)


def criterion_8() -> Outcome:
    def body():
        rng = np.random.default_rng(SEED + 8)
        h_r, phi0 = qla.random_hermitian(4, rng, 3.0), qla.random_state(4, rng)
        gammas = (0.1, 1.0, 10.0, 30.0)
        hists = {g: history_state(gaussian_clock(8, g, 1.0), h_r, phi0) for g in gammas}
        coherent = {g: relative_family(h).purities for g, h in hists.items()}
        mixed = {g: relative_family(h, mixture=True).purities for g, h in hists.items()}
        return gammas, coherent, mixed

    (gammas, coherent, mixed), dt = timed(body)
    p1 = coherent[1.0]
    rows = np.array([coherent[g] for g in gammas])
    increasing = bool(np.all(np.diff(rows, axis=0) > 0))
    near = float(np.abs(1 - coherent[30.0]).max())
    clauses = {
        "every purity <= 1 - 1e-3 at gamma dt = 1": (bool(np.all(p1 <= 1 - 1e-3)), f"max {p1.max():.17g}"),
        "purities increase strictly with gamma": (increasing, increasing),
        "purity within 1e-6 of 1 at gamma dt = 30": (near <= 1e-6, f"{near:.3g}"),
    }
    m = np.array([mixed[g] for g in gammas])
    note = ("a rank-one projection of a pure universe is pure for any hand overlap; the branch-incoherent "
            f"universe gives max purity {mixed[1.0].max():.4f} at gamma dt = 1, strictly increasing "
            f"{bool(np.all(np.diff(m, axis=0) > 0))}, within {np.abs(1 - mixed[30.0]).max():.2g} of 1 at 30")
    return Outcome(8, "mixed relative states, Gaussian clock d = 8", clauses, dt, None, note)


def criterion_9() -> Outcome:
    def body():
        mismatched = []
        with tempfile.TemporaryDirectory() as tmp:
            for name in scenarios.SCENARIOS:
                digests = []
                for run in ("a", "b"):
                    out = Path(tmp) / name / run
                    code = cli.main(["run", "--scenario", name, "--seed", "11", "--out", str(out), "--json"])
                    h = hashlib.sha256()
                    for f in ("report.json", "timeseries.csv"):
                        h.update((out / f).read_bytes())
                    digests.append((code, h.hexdigest()))
                if digests[0] != digests[1]:
                    mismatched.append(name)
        return mismatched

    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        mismatched, dt = timed(body)
    return Outcome(9, "determinism of every scenario", {"identical hashes": (not mismatched, mismatched or "all")},
                   dt, None)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(criterion, acceptance_log):
    outcome = criterion()
    acceptance_log.append(outcome.line())
    print(outcome.line())
    assert outcome.passed, outcome.line()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
