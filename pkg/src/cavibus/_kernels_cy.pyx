# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot propagation loops.

Same entry points and semantics as _kernels_py; everything runs on
Fortran-ordered buffers with preallocated LAPACK/BLAS workspaces so a full
integration is a single Python call.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

BACKEND = "compiled"

ctypedef double complex zcomplex


cdef void _assemble(zcomplex* out, const zcomplex* mats, const zcomplex* coeffs,
                    int nmat, int dd) noexcept nogil:
    # out = sum_m coeffs[m] * mats[:, :, m]; per-m blocks are contiguous
    cdef int m, i
    cdef zcomplex c
    for i in range(dd):
        out[i] = 0
    for m in range(nmat):
        c = coeffs[m]
        if c == 0:
            continue
        for i in range(dd):
            out[i] = out[i] + c * mats[m * dd + i]


cdef int _expm_apply(zcomplex* h, double* w, zcomplex* phases,
                     zcomplex* u, zcomplex* tmp, int d, int k,
                     zcomplex* work, int lwork, double* rwork, int lrwork,
                     int* iwork, int liwork) noexcept nogil:
    # h holds i*G (Hermitian) on entry, eigenvectors on exit.
    # u <- V diag(exp(-i w)) V^H u, using tmp as scratch.
    cdef int info = 0, i, j
    cdef zcomplex one = 1, zero = 0
    zheevd('V', 'L', &d, h, &d, w, work, &lwork, rwork, &lrwork,
           iwork, &liwork, &info)
    if info != 0:
        return info
    for j in range(d):
        phases[j] = cos(w[j]) - 1j * sin(w[j])
    # tmp = V^H @ u
    zgemm('C', 'N', &d, &k, &d, &one, h, &d, u, &d, &zero, tmp, &d)
    for i in range(k):
        for j in range(d):
            tmp[i * d + j] = tmp[i * d + j] * phases[j]
    # u = V @ tmp
    zgemm('N', 'N', &d, &k, &d, &one, h, &d, tmp, &d, &zero, u, &d)
    return 0


def evolve_product(mats, exps, u0):
    """Apply prod_{s,e} expm(sum_m exps[s,e,m] mats[m]) to u0; step s=0 acts first."""
    cdef cnp.ndarray[zcomplex, ndim=3] exps_c = np.ascontiguousarray(exps, dtype=np.complex128)
    mats_np = np.asarray(mats, dtype=np.complex128)
    cdef int nmat = mats_np.shape[0]
    cdef int d = mats_np.shape[1]
    cdef int nsteps = exps_c.shape[0]
    cdef int nexp = exps_c.shape[1]
    if exps_c.shape[2] != nmat:
        raise ValueError("exps last axis must match number of matrices")
    u_np = np.asarray(u0, dtype=np.complex128)
    squeeze = u_np.ndim == 1
    if squeeze:
        u_np = u_np[:, None]
    cdef int k = u_np.shape[1]

    # Fortran stack: mats_f[:, :, m] contiguous per m; i*G folded in here so the
    # assembled buffer is directly the Hermitian matrix for zheevd.
    cdef cnp.ndarray[zcomplex, ndim=3] mats_f = np.asfortranarray(
        (1j * mats_np).transpose(1, 2, 0))
    cdef cnp.ndarray[zcomplex, ndim=2] u = np.asfortranarray(u_np)
    cdef cnp.ndarray[zcomplex, ndim=2] h = np.empty((d, d), dtype=np.complex128, order="F")
    cdef cnp.ndarray[zcomplex, ndim=2] tmp = np.empty((d, k), dtype=np.complex128, order="F")
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d, dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=1] phases = np.empty(d, dtype=np.complex128)

    # workspace query
    cdef int lwork = -1, lrwork = -1, liwork = -1, info = 0
    cdef zcomplex wk_q
    cdef double rwk_q
    cdef int iwk_q
    zheevd('V', 'L', &d, &h[0, 0], &d, &w[0], &wk_q, &lwork, &rwk_q, &lrwork,
           &iwk_q, &liwork, &info)
    lwork = <int>wk_q.real
    lrwork = <int>rwk_q
    liwork = iwk_q
    cdef cnp.ndarray[zcomplex, ndim=1] work = np.empty(lwork, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] rwork = np.empty(lrwork, dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1] iwork = np.empty(liwork, dtype=np.intc)

    cdef int s, e, dd = d * d
    cdef zcomplex* mats_p = &mats_f[0, 0, 0]
    cdef zcomplex* exps_p = &exps_c[0, 0, 0]
    with nogil:
        for s in range(nsteps):
            for e in range(nexp):
                _assemble(&h[0, 0], mats_p, exps_p + (s * nexp + e) * nmat, nmat, dd)
                info = _expm_apply(&h[0, 0], &w[0], &phases[0], &u[0, 0], &tmp[0, 0],
                                   d, k, &work[0], lwork, &rwork[0], lrwork,
                                   &iwork[0], liwork)
                if info != 0:
                    break
            if info != 0:
                break
    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")
    out = np.ascontiguousarray(u)
    return out[:, 0] if squeeze else out


cdef void _add_scaled(zcomplex* out, const zcomplex* x, zcomplex alpha, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        out[i] = out[i] + alpha * x[i]


cdef void _rhs(zcomplex* out, zcomplex* meff, zcomplex* rho,
               const zcomplex* cops, const double* rates, int ncol,
               zcomplex* scratch, int d) noexcept nogil:
    # out = meff@rho + rho@meff^H + sum_j rates_j L_j rho L_j^H
    cdef zcomplex one = 1, zero = 0, alpha
    cdef int j, dd = d * d
    zgemm('N', 'N', &d, &d, &d, &one, meff, &d, rho, &d, &zero, out, &d)
    zgemm('N', 'C', &d, &d, &d, &one, rho, &d, meff, &d, &one, out, &d)
    for j in range(ncol):
        zgemm('N', 'N', &d, &d, &d, &one, <zcomplex*>cops + j * dd, &d, rho, &d,
              &zero, scratch, &d)
        alpha = rates[j]
        zgemm('N', 'C', &d, &d, &d, &alpha, scratch, &d, <zcomplex*>cops + j * dd,
              &d, &one, out, &d)


def lindblad_rk4(hmats, hcoeffs, c_ops, rates, rho0, double dt):
    """Fixed-step RK4 Lindblad propagation; see _kernels_py.lindblad_rk4."""
    hmats_np = np.asarray(hmats, dtype=np.complex128)
    cdef int nmat = hmats_np.shape[0]
    cdef int d = hmats_np.shape[1]
    cdef cnp.ndarray[zcomplex, ndim=3] coeffs = np.ascontiguousarray(hcoeffs, dtype=np.complex128)
    cdef int nsteps = coeffs.shape[0]
    cops_np = np.asarray(c_ops, dtype=np.complex128).reshape(-1, d, d)
    cdef int ncol = cops_np.shape[0]
    rates_np = np.ascontiguousarray(rates, dtype=np.float64)

    # -i folded into the Hamiltonian term stack so drift = sum c_m mats_m - K/2
    cdef cnp.ndarray[zcomplex, ndim=3] mats_f = np.asfortranarray(
        (-1j * hmats_np).transpose(1, 2, 0))
    # collapse operators as one contiguous Fortran stack
    cdef cnp.ndarray[zcomplex, ndim=3] cops_f = np.asfortranarray(cops_np.transpose(1, 2, 0))
    k_const = np.zeros((d, d), dtype=np.complex128)
    for j in range(ncol):
        k_const += rates_np[j] * (cops_np[j].conj().T @ cops_np[j])
    cdef cnp.ndarray[zcomplex, ndim=2] khalf = np.asfortranarray(-0.5 * k_const)

    cdef cnp.ndarray[zcomplex, ndim=2] rho = np.asfortranarray(np.asarray(rho0, dtype=np.complex128))
    cdef cnp.ndarray[zcomplex, ndim=2] meff = np.empty((d, d), dtype=np.complex128, order="F")
    cdef cnp.ndarray[zcomplex, ndim=3] kbuf = np.empty((4, d, d), dtype=np.complex128, order="C")
    cdef cnp.ndarray[zcomplex, ndim=2] stage = np.empty((d, d), dtype=np.complex128, order="F")
    cdef cnp.ndarray[zcomplex, ndim=2] scratch = np.empty((d, d), dtype=np.complex128, order="F")

    cdef cnp.ndarray[double, ndim=1] rates_c = rates_np
    cdef zcomplex* rho_p = &rho[0, 0]
    cdef zcomplex* meff_p = &meff[0, 0]
    cdef zcomplex* stage_p = &stage[0, 0]
    cdef zcomplex* scratch_p = &scratch[0, 0]
    cdef zcomplex* khalf_p = &khalf[0, 0]
    cdef zcomplex* mats_p = &mats_f[0, 0, 0]
    cdef zcomplex* cops_p = NULL
    cdef double* rates_p = NULL
    if ncol > 0:
        cops_p = &cops_f[0, 0, 0]
        rates_p = &rates_c[0]
    cdef zcomplex* k1
    cdef zcomplex* k2
    cdef zcomplex* k3
    cdef zcomplex* k4
    k1 = &kbuf[0, 0, 0]; k2 = &kbuf[1, 0, 0]; k3 = &kbuf[2, 0, 0]; k4 = &kbuf[3, 0, 0]

    cdef int s, i, dd = d * d
    cdef zcomplex* coeffs_p = &coeffs[0, 0, 0]
    with nogil:
        for s in range(nsteps):
            # k1 at node 0
            _assemble(meff_p, mats_p, coeffs_p + (s * 3 + 0) * nmat, nmat, dd)
            _add_scaled(meff_p, khalf_p, 1, dd)
            _rhs(k1, meff_p, rho_p, cops_p, rates_p, ncol, scratch_p, d)
            # k2, k3 at node 1 (midpoint)
            _assemble(meff_p, mats_p, coeffs_p + (s * 3 + 1) * nmat, nmat, dd)
            _add_scaled(meff_p, khalf_p, 1, dd)
            for i in range(dd):
                stage_p[i] = rho_p[i]
            _add_scaled(stage_p, k1, 0.5 * dt, dd)
            _rhs(k2, meff_p, stage_p, cops_p, rates_p, ncol, scratch_p, d)
            for i in range(dd):
                stage_p[i] = rho_p[i]
            _add_scaled(stage_p, k2, 0.5 * dt, dd)
            _rhs(k3, meff_p, stage_p, cops_p, rates_p, ncol, scratch_p, d)
            # k4 at node 2
            _assemble(meff_p, mats_p, coeffs_p + (s * 3 + 2) * nmat, nmat, dd)
            _add_scaled(meff_p, khalf_p, 1, dd)
            for i in range(dd):
                stage_p[i] = rho_p[i]
            _add_scaled(stage_p, k3, dt, dd)
            _rhs(k4, meff_p, stage_p, cops_p, rates_p, ncol, scratch_p, d)
            for i in range(dd):
                rho_p[i] = rho_p[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return np.ascontiguousarray(rho)
