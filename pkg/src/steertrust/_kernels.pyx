# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_kernels_py`` function for function."""
import numpy as np

from libc.math cimport sin, fabs, NAN, M_PI
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport zheev

cdef double BAND_LOW = 0.9995
cdef double BAND_HIGH = 1.0 - 1e-9
cdef int MAX_BISECTIONS = 200


cdef inline double _deviation(double theta, const double[::1] h) noexcept nogil:
    cdef double acc = 0.0, s
    cdef Py_ssize_t k
    for k in range(h.shape[0]):
        s = sin(0.5 * theta * h[k])
        acc += 4.0 * s * s
    return acc


def calibrate_angles(h, targets):
    cdef const double[:, ::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(targets, dtype=np.float64)
    out = np.zeros(hv.shape[0])
    cdef double[::1] theta = out
    cdef Py_ssize_t r, k
    cdef int it
    cdef double hmax, upper, lo_t, hi_t, reach, lo, hi, mid, v, t
    with nogil:
        for r in range(hv.shape[0]):
            t = tv[r]
            if t <= 0.0:
                theta[r] = 0.0
                continue
            hmax = 0.0
            for k in range(hv.shape[1]):
                if fabs(hv[r, k]) > hmax:
                    hmax = fabs(hv[r, k])
            if hmax == 0.0:
                theta[r] = NAN
                continue
            upper = M_PI / hmax
            lo_t = BAND_LOW * t
            hi_t = BAND_HIGH * t
            reach = _deviation(upper, hv[r])
            if reach < lo_t:
                theta[r] = NAN
                continue
            if reach <= hi_t:
                theta[r] = upper
                continue
            lo = 0.0
            hi = upper
            theta[r] = -1.0
            for it in range(MAX_BISECTIONS):
                mid = 0.5 * (lo + hi)
                v = _deviation(mid, hv[r])
                if v > hi_t:
                    hi = mid
                elif v < lo_t:
                    lo = mid
                else:
                    theta[r] = mid
                    break
            if theta[r] < 0.0:
                theta[r] = lo
    return out


def fact1_statistics(rhos, sigma, taus):
    cdef const double complex[:, :, ::1] rv = np.ascontiguousarray(rhos, dtype=np.complex128)
    cdef const double complex[:, :, ::1] sv = np.ascontiguousarray(sigma, dtype=np.complex128)
    cdef const double complex[:, :, :, ::1] tv = np.ascontiguousarray(taus, dtype=np.complex128)
    cdef Py_ssize_t S = rv.shape[0], m = sv.shape[0], d = sv.shape[1]
    inferred_arr = np.zeros((S, d, d), dtype=np.complex128)
    dev_arr = np.zeros(S)
    coef_arr = np.zeros(S)
    smin_arr = np.zeros(S)
    smax_arr = np.zeros(S)
    cross_arr = np.zeros(S)
    q_arr = np.zeros(m, dtype=np.complex128)
    cdef double complex[:, :, ::1] inf = inferred_arr
    cdef double[::1] dev = dev_arr, coef = coef_arr, smin = smin_arr, smax = smax_arr, cross = cross_arr
    cdef double complex[::1] q = q_arr
    cdef Py_ssize_t s, i, j, a, b
    cdef double complex acc, rr, x, y
    cdef double inv_d = 1.0 / d, worst, re, dr, di, tot
    cdef double trace
    with nogil:
        for s in range(S):
            worst = 0.0
            trace = 0.0
            for a in range(d):
                trace += rv[s, a, a].real
            for i in range(m):
                acc = 0.0
                rr = 0.0
                for a in range(d):
                    for b in range(d):
                        acc = acc + rv[s, a, b] * tv[s, i, a, b].conjugate()
                        rr = rr + rv[s, a, b] * sv[i, a, b].conjugate()
                if i == 0:
                    q[i] = trace * inv_d
                else:
                    q[i] = acc * inv_d
                re = fabs((rr * inv_d).real - q[i].real)
                if re > worst:
                    worst = re
            coef[s] = worst
            for a in range(d):
                for b in range(d):
                    acc = 0.0
                    for i in range(m):
                        acc = acc + q[i] * sv[i, a, b]
                    inf[s, a, b] = acc
            tot = 0.0
            for a in range(d):
                for b in range(a, d):
                    x = inf[s, a, b]
                    y = inf[s, b, a].conjugate()
                    x = 0.5 * (x + y)
                    inf[s, a, b] = x
                    inf[s, b, a] = x.conjugate()
            for a in range(d):
                for b in range(d):
                    dr = inf[s, a, b].real - rv[s, a, b].real
                    di = inf[s, a, b].imag - rv[s, a, b].imag
                    tot += dr * dr + di * di
            dev[s] = tot
            smin[s] = 1e300
            smax[s] = -1e300
            cross[s] = 0.0
            for i in range(m):
                for j in range(m):
                    re = 0.0
                    for a in range(d):
                        for b in range(d):
                            re += (tv[s, i, a, b] * sv[j, a, b].conjugate()).real
                    if i == j:
                        if re < smin[s]:
                            smin[s] = re
                        if re > smax[s]:
                            smax[s] = re
                    elif fabs(re) > cross[s]:
                        cross[s] = fabs(re)
    return inferred_arr, dev_arr, coef_arr, smin_arr, smax_arr, cross_arr


def strategy_values(F):
    cdef const double complex[:, :, :, ::1] fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef int n_in = fv.shape[0], n_out = fv.shape[1], d = fv.shape[2]
    cdef Py_ssize_t total = 1
    cdef int y
    for y in range(n_in):
        total *= n_out
    values_arr = np.empty(total)
    cdef double[::1] values = values_arr
    cdef char jobz = b'N', uplo = b'L'
    cdef int n = d, lda = d, lwork = -1, info = 0
    cdef double complex wkopt
    cdef double complex *buf = <double complex *> malloc(d * d * sizeof(double complex))
    cdef double *w = <double *> malloc(d * sizeof(double))
    cdef double *rwork = <double *> malloc((3 * d) * sizeof(double))
    cdef double complex *work = NULL
    cdef int *digits = <int *> malloc(n_in * sizeof(int))
    cdef Py_ssize_t idx, rem
    cdef int a, b, f
    if buf == NULL or w == NULL or rwork == NULL or digits == NULL:
        free(buf); free(w); free(rwork); free(digits)
        raise MemoryError()
    zheev(&jobz, &uplo, &n, buf, &lda, w, &wkopt, &lwork, rwork, &info)
    lwork = <int> wkopt.real
    if lwork < 1:
        lwork = 2 * d
    work = <double complex *> malloc(lwork * sizeof(double complex))
    if work == NULL:
        free(buf); free(w); free(rwork); free(digits)
        raise MemoryError()
    try:
        with nogil:
            for idx in range(total):
                rem = idx
                for y in range(n_in - 1, -1, -1):
                    digits[y] = rem % n_out
                    rem = rem // n_out
                # column-major, lower triangle referenced; Hermitian part only
                for b in range(d):
                    for a in range(b, d):
                        buf[b * d + a] = 0.0
                for y in range(n_in):
                    f = digits[y]
                    for b in range(d):
                        for a in range(b, d):
                            buf[b * d + a] = buf[b * d + a] + 0.5 * (fv[y, f, a, b] + fv[y, f, b, a].conjugate())
                zheev(&jobz, &uplo, &n, buf, &lda, w, work, &lwork, rwork, &info)
                if info != 0:
                    break
                values[idx] = w[d - 1]
    finally:
        free(buf); free(w); free(rwork); free(digits); free(work)
    if info != 0:
        raise ArithmeticError(f"zheev failed with info={info}")
    return values_arr
