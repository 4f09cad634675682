"""Pure numpy kernels for the hot propagation loops.

The compiled module ``_kernels_cy`` implements the same two entry points with
identical semantics; ``_backend`` picks one at import time.  Keep the two in
lockstep: tests/test_backends.py asserts they agree to machine precision.

evolve_product contract: for every step s and exponential e the combination
sum_m exps[s, e, m] * mats[m] must be anti-Hermitian, so each step factor
expm(G) is unitary and is computed through a Hermitian eigendecomposition
of iG.
"""
import numpy as np

BACKEND = "python"


def evolve_product(mats: np.ndarray, exps: np.ndarray, u0: np.ndarray) -> np.ndarray:
    """Apply prod_{s,e} expm(sum_m exps[s,e,m] mats[m]) to u0; step s=0 acts first.

    mats: (M, D, D) constant matrices, exps: (S, E, M) exponent coefficients
    (time step and -i already folded in), u0: (D, K) columns to propagate.
    """
    mats = np.asarray(mats, dtype=complex)
    exps = np.asarray(exps, dtype=complex)
    u = np.array(u0, dtype=complex)
    n_steps, n_exp, _ = exps.shape
    for s in range(n_steps):
        for e in range(n_exp):
            g = np.tensordot(exps[s, e], mats, axes=(0, 0))
            w, v = np.linalg.eigh(1j * g)
            u = (v * np.exp(-1j * w)) @ (v.conj().T @ u)
    return u


def lindblad_rk4(hmats: np.ndarray, hcoeffs: np.ndarray, c_ops: np.ndarray,
                 rates: np.ndarray, rho0: np.ndarray, dt: float) -> np.ndarray:
    """Fixed-step RK4 for drho/dt = -i[H,rho] + sum_j rate_j D[L_j]rho.

    hmats: (M, D, D) Hamiltonian terms, hcoeffs: (S, 3, M) term coefficients
    at the nodes (t_s, t_s + dt/2, t_s + dt), c_ops: (J, D, D) collapse
    operators with rates (J,).  Uses the drift form M = -iH - K/2 with
    K = sum_j rate_j L_j^dag L_j, so one right-hand side costs 2 + 2J matmuls.
    """
    hmats = np.asarray(hmats, dtype=complex)
    hcoeffs = np.asarray(hcoeffs, dtype=complex)
    rho = np.array(rho0, dtype=complex)
    d = rho.shape[0]
    c_ops = np.asarray(c_ops, dtype=complex).reshape(-1, d, d)
    rates = np.asarray(rates, dtype=float)

    k_const = np.zeros((d, d), dtype=complex)
    for rate, lop in zip(rates, c_ops):
        k_const += rate * (lop.conj().T @ lop)

    def drift(coeffs):
        h = np.tensordot(coeffs, hmats, axes=(0, 0))
        return -1j * h - 0.5 * k_const

    def rhs(meff, r):
        out = meff @ r + r @ meff.conj().T
        for rate, lop in zip(rates, c_ops):
            out += rate * (lop @ r @ lop.conj().T)
        return out

    for s in range(hcoeffs.shape[0]):
        m0 = drift(hcoeffs[s, 0])
        m1 = drift(hcoeffs[s, 1])
        m2 = drift(hcoeffs[s, 2])
        k1 = rhs(m0, rho)
        k2 = rhs(m1, rho + (0.5 * dt) * k1)
        k3 = rhs(m1, rho + (0.5 * dt) * k2)
        k4 = rhs(m2, rho + dt * k3)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho
