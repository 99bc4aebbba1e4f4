# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched kernels.

Same contracts as the NumPy reference module. The transfer kernel uses the
closed-form elimination of the mirror coordinate instead of a generic solve.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, NAN

cnp.import_array()

cdef double RADICAND_RTOL = 1e-12
cdef double EN_FLOOR = 1e-12


cdef inline double _det2(double a, double b, double c, double d) nogil:
    return a * d - b * c


cdef inline void _mulj(double x[2][2], const double y[2][2]) nogil:
    # x <- x @ J @ y with J = [[0, 1], [-1, 0]]
    cdef double r00 = -x[0][1] * y[0][0] + x[0][0] * y[1][0]
    cdef double r01 = -x[0][1] * y[0][1] + x[0][0] * y[1][1]
    cdef double r10 = -x[1][1] * y[0][0] + x[1][0] * y[1][0]
    cdef double r11 = -x[1][1] * y[0][1] + x[1][0] * y[1][1]
    x[0][0] = r00
    x[0][1] = r01
    x[1][0] = r10
    x[1][1] = r11


cdef inline double _simon_t(const double[:, :] m) nogil:
    # tr(A J B J C J B^T J)
    cdef double x[2][2]
    cdef double b[2][2]
    cdef double c[2][2]
    cdef double bt[2][2]
    cdef int i, j
    for i in range(2):
        for j in range(2):
            x[i][j] = m[i, j]
            b[i][j] = m[i, j + 2]
            c[i][j] = m[i + 2, j + 2]
            bt[i][j] = m[j, i + 2]
    _mulj(x, b)
    _mulj(x, c)
    _mulj(x, bt)
    # trailing J: tr(X J) = x10 - x01
    return x[1][0] - x[0][1]


cdef inline double _det4(const double[:, :] m) nogil:
    # Gaussian elimination with partial pivoting; explicit cofactor sums lose
    # too many digits on strongly squeezed states.
    cdef double a[4][4]
    cdef double det = 1.0, t, piv
    cdef int i, j, k, p
    for i in range(4):
        for j in range(4):
            a[i][j] = m[i, j]
    for k in range(4):
        p = k
        for i in range(k + 1, 4):
            if fabs(a[i][k]) > fabs(a[p][k]):
                p = i
        if a[p][k] == 0.0:
            return 0.0
        if p != k:
            for j in range(4):
                t = a[k][j]
                a[k][j] = a[p][j]
                a[p][j] = t
            det = -det
        piv = a[k][k]
        det *= piv
        for i in range(k + 1, 4):
            t = a[i][k] / piv
            for j in range(k + 1, 4):
                a[i][j] -= t * a[k][j]
    return det


def negativity_batch(V):
    cdef const double[:, :, :] vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0], k
    en_a = np.empty(n)
    nu_a = np.empty(n)
    fl_a = np.zeros(n, dtype=bool)
    cdef double[:] en = en_a
    cdef double[:] nu = nu_a
    cdef cnp.npy_bool[:] flag = fl_a
    cdef double eta, detv, rad, arg, e, da, dc, dp
    with nogil:
        for k in range(n):
            da = _det2(vv[k, 0, 0], vv[k, 0, 1], vv[k, 1, 0], vv[k, 1, 1])
            dc = _det2(vv[k, 2, 2], vv[k, 2, 3], vv[k, 3, 2], vv[k, 3, 3])
            dp = _det2(vv[k, 0, 2], vv[k, 0, 3], vv[k, 1, 2], vv[k, 1, 3])
            eta = da + dc - 2.0 * dp
            detv = _det4(vv[k])
            # eta^2 - 4 det V through local invariants; exact (a - c)^2 when B = 0
            rad = (da - dc) * (da - dc) + 4.0 * (_simon_t(vv[k]) - dp * (da + dc))
            if rad < -RADICAND_RTOL * (eta * eta if eta * eta > 1.0 else 1.0):
                flag[k] = True
                en[k] = 0.0
                nu[k] = NAN
                continue
            if rad < 0.0:
                rad = 0.0
            # 2*eta - 2*sqrt(rad) == 8 det V / (eta + sqrt(rad)), free of cancellation
            arg = eta + sqrt(rad)
            if arg > 0.0:
                arg = 8.0 * detv / arg
            else:
                arg = -1.0
            if not (arg > 0.0):
                flag[k] = True
                en[k] = 0.0
                nu[k] = NAN
                continue
            e = -0.5 * log(arg)
            en[k] = e if e > EN_FLOOR else 0.0
            nu[k] = sqrt(arg) / 2.0
    return en_a, nu_a, fl_a


def transfer_batch(omega, inv_chi, double gamma_in, double gamma_loss, delta, gx, gf):
    cdef const double[:] om = np.ascontiguousarray(omega, dtype=np.float64)
    cdef const double complex[:] ich = np.ascontiguousarray(inv_chi, dtype=np.complex128)
    cdef Py_ssize_t n = om.shape[0], k, j, p, q, col
    M_a = np.zeros((n, 4, 8), dtype=np.complex128)
    v_a = np.zeros((n, 4), dtype=np.complex128)
    cdef double complex[:, :, :] M = M_a
    cdef double complex[:, :] v = v_a
    cdef double gam = gamma_in + gamma_loss
    cdef double rin = sqrt(2.0 * gamma_in), rloss = sqrt(2.0 * gamma_loss)
    cdef double dl[2]
    cdef double gxa[2]
    cdef double gfa[2]
    cdef double complex D[2][2][2]
    cdef double complex xc[8]
    cdef double complex s, den, keff, chi_eff, w
    for j in range(2):
        dl[j] = delta[j]
        gxa[j] = gx[j]
        gfa[j] = gf[j]
    with nogil:
        for k in range(n):
            s = gam + 1j * om[k]
            keff = 0.0
            for j in range(2):
                den = s * s + dl[j] * dl[j]
                D[j][0][0] = s / den
                D[j][0][1] = -dl[j] / den
                D[j][1][0] = dl[j] / den
                D[j][1][1] = s / den
                keff = keff - gfa[j] * gxa[j] * D[j][0][1]
            chi_eff = 1.0 / (ich[k] + keff)
            # mirror displacement per unit port amplitude
            for col in range(8):
                xc[col] = 0.0
            for j in range(2):
                for q in range(2):
                    xc[2 * j + q] = chi_eff * gfa[j] * D[j][0][q] * rin
                    xc[4 + 2 * j + q] = chi_eff * gfa[j] * D[j][0][q] * rloss
            for j in range(2):
                for p in range(2):
                    w = rin * gxa[j] * D[j][p][1]
                    for col in range(8):
                        M[k, 2 * j + p, col] = w * xc[col]
                    for q in range(2):
                        M[k, 2 * j + p, 2 * j + q] += rin * rin * D[j][p][q]
                        M[k, 2 * j + p, 4 + 2 * j + q] += rin * rloss * D[j][p][q]
                    M[k, 2 * j + p, 2 * j + p] -= 1.0
                    v[k, 2 * j + p] = w * chi_eff
    return M_a, v_a


def covariance_batch(M, v, s_force):
    cdef const double complex[:, :, :] mm = np.ascontiguousarray(M, dtype=np.complex128)
    cdef const double complex[:, :] vv = np.ascontiguousarray(v, dtype=np.complex128)
    cdef const double[:] sf = np.ascontiguousarray(s_force, dtype=np.float64)
    cdef Py_ssize_t n = mm.shape[0], ncol = mm.shape[2], k, a, b, c
    V_a = np.empty((n, 4, 4))
    cdef double[:, :, :] V = V_a
    cdef double acc
    with nogil:
        for k in range(n):
            for a in range(4):
                for b in range(a, 4):
                    acc = 0.0
                    for c in range(ncol):
                        acc = acc + (mm[k, a, c].real * mm[k, b, c].real
                                     + mm[k, a, c].imag * mm[k, b, c].imag)
                    acc = acc + sf[k] * (vv[k, a].real * vv[k, b].real
                                         + vv[k, a].imag * vv[k, b].imag)
                    V[k, a, b] = 0.5 * acc
                    V[k, b, a] = 0.5 * acc
    return V_a
