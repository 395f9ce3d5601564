"""Independent reference computations used to check the package.

Nothing here calls into ``timeless``; each routine takes a different route
(explicit loops, scipy's Pade exponential, joint energy basis) from the code
it is compared with.
"""
import numpy as np
import scipy.linalg as sla


def partial_trace_loops(rho, d_a, d_b, keep="A"):
    out = np.zeros((d_a, d_a) if keep == "A" else (d_b, d_b), dtype=complex)
    for i in range(d_a):
        for j in range(d_a):
            for k in range(d_b):
                for m in range(d_b):
                    if keep == "A" and k == m:
                        out[i, j] += rho[i * d_b + k, j * d_b + k]
                    if keep == "B" and i == j:
                        out[k, m] += rho[i * d_b + k, i * d_b + m]
    return out


def expm_pade(h, t):
    return sla.expm(-1j * t * np.asarray(h))


def energy_basis_residual(psi, h_c, h_r):
    """``||H psi||`` from the joint eigenbasis of ``H_C`` and ``H_R``.

    ``H`` acts diagonally there, so the residual is
    ``sqrt(sum |eps_m + E_n|^2 |<eps_m E_n|psi>|^2)``.
    """
    ec, vc = np.linalg.eigh(h_c)
    er, vr = np.linalg.eigh(h_r)
    coeff = vc.conj().T @ np.asarray(psi).reshape(len(ec), len(er)) @ vr.conj()
    return float(np.sqrt(np.sum(np.abs(np.add.outer(ec, er)) ** 2 * np.abs(coeff) ** 2)))


def relative_state_literal(psi_or_rho, hand, d_c, d_r):
    """``Tr_C[(P (x) I) rho] / Tr[(P (x) I) rho]`` built from full matrices."""
    x = np.asarray(psi_or_rho, dtype=complex)
    rho = np.outer(x, x.conj()) if x.ndim == 1 else x
    p = np.kron(np.outer(hand, hand.conj()), np.eye(d_r))
    num = partial_trace_loops(p @ rho, d_c, d_r, keep="B")
    return num / np.trace(p @ rho)


def realign_loops(op, d_a, d_b):
    r = np.zeros((d_a * d_a, d_b * d_b), dtype=complex)
    for i in range(d_a):
        for j in range(d_a):
            for k in range(d_b):
                for m in range(d_b):
                    r[i * d_a + j, k * d_b + m] = op[i * d_b + k, j * d_b + m]
    return r


def swap(d):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1
    return s
