# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts and operation order as ``_pykernels``."""

import numpy as np

from libc.stdlib cimport malloc, free, qsort
from libc.math cimport INFINITY


cdef struct ValLab:
    double v
    int y


cdef int _cmp_vallab(const void* a, const void* b) noexcept nogil:
    cdef double va = (<ValLab*>a).v
    cdef double vb = (<ValLab*>b).v
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


cdef inline double _gini(double n, double p) noexcept nogil:
    cdef double a = p / n
    cdef double b = (n - p) / n
    return 1.0 - a * a - b * b


def best_split(const double[:, ::1] X, const signed char[::1] y,
               const Py_ssize_t[::1] rows, const Py_ssize_t[::1] features):
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t k = features.shape[0]
    cdef Py_ssize_t i, fi, f
    cdef long total_pos = 0, pl
    cdef double parent, gl, gr, gain, thr
    cdef double best_gain = -INFINITY, best_thr = 0.0
    cdef Py_ssize_t best_f = -1
    cdef bint found = False
    cdef double dm = <double>m
    cdef double nl, nr
    cdef ValLab* buf = <ValLab*>malloc(m * sizeof(ValLab))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(m):
                total_pos += y[rows[i]]
            parent = _gini(dm, <double>total_pos)
            for fi in range(k):
                f = features[fi]
                for i in range(m):
                    buf[i].v = X[rows[i], f]
                    buf[i].y = y[rows[i]]
                qsort(buf, m, sizeof(ValLab), _cmp_vallab)
                pl = 0
                for i in range(m - 1):
                    pl += buf[i].y
                    if not (buf[i].v < buf[i + 1].v):
                        continue
                    nl = <double>(i + 1)
                    nr = <double>(m - i - 1)
                    gl = _gini(nl, <double>pl)
                    gr = _gini(nr, <double>(total_pos - pl))
                    gain = parent - (nl / dm) * gl - (nr / dm) * gr
                    if gain > best_gain:
                        thr = (buf[i].v + buf[i + 1].v) / 2.0
                        if thr >= buf[i + 1].v:
                            thr = buf[i].v
                        best_gain = gain
                        best_thr = thr
                        best_f = f
                        found = True
    finally:
        free(buf)
    if not found:
        return (-1, 0.0, -np.inf, False)
    return (int(best_f), float(best_thr), float(best_gain), True)


def best_stump(const double[:, ::1] Xs, const Py_ssize_t[:, ::1] order,
               const double[::1] w, const signed char[::1] ypos):
    cdef Py_ssize_t d = Xs.shape[0], n = Xs.shape[1]
    cdef Py_ssize_t f, i, j
    cdef double tot_pos = 0.0, tot_neg = 0.0, lpos, lneg, e_plus, e_minus
    cdef double best_err = INFINITY, best_thr = 0.0, lo, hi, thr
    cdef Py_ssize_t best_f = -1
    cdef int best_s = 1
    with nogil:
        for i in range(n):
            if ypos[i] == 1:
                tot_pos += w[i]
            else:
                tot_neg += w[i]
        for f in range(d):
            lpos = 0.0
            lneg = 0.0
            for i in range(n - 1):
                j = order[f, i]
                if ypos[j] == 1:
                    lpos += w[j]
                else:
                    lneg += w[j]
                if not (Xs[f, i] < Xs[f, i + 1]):
                    continue
                e_plus = lpos + (tot_neg - lneg)
                e_minus = lneg + (tot_pos - lpos)
                if e_plus < best_err:
                    best_err = e_plus
                    best_f = f
                    best_s = 1
                    best_thr = _mid(Xs[f, i], Xs[f, i + 1])
                if e_minus < best_err:
                    best_err = e_minus
                    best_f = f
                    best_s = -1
                    best_thr = _mid(Xs[f, i], Xs[f, i + 1])
    if best_f < 0:
        return (-1, 0.0, 1, 0.5)
    return (int(best_f), float(best_thr), int(best_s), float(best_err))


cdef inline double _mid(double lo, double hi) noexcept nogil:
    cdef double thr = (lo + hi) / 2.0
    if thr >= hi:
        thr = lo
    return thr


def sq_distances(const double[:, ::1] A, const double[:, ::1] B):
    cdef Py_ssize_t m = A.shape[0], n = B.shape[0], d = A.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    out = np.empty((m, n))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                s = 0.0
                for k in range(d):
                    diff = A[i, k] - B[j, k]
                    s += diff * diff
                o[i, j] = s
    return out


def dot_rows(const double[:, ::1] X, const double[::1] w):
    cdef Py_ssize_t m = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, k
    cdef double s
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            s = 0.0
            for k in range(d):
                s += X[i, k] * w[k]
            o[i] = s
    return out


def svm_epoch(const double[:, ::1] X, const double[::1] ypm, const Py_ssize_t[::1] order,
              double[::1] w, double[::1] w_avg, double b, double b_avg, long t,
              double lam, double eta0):
    cdef Py_ssize_t n_steps = order.shape[0], d = X.shape[1]
    cdef Py_ssize_t s, i, k
    cdef double eta, yi, dot, margin, decay, ey, inv
    with nogil:
        for s in range(n_steps):
            i = order[s]
            t += 1
            eta = eta0 / (1.0 + lam * eta0 * <double>t)
            yi = ypm[i]
            dot = 0.0
            for k in range(d):
                dot += w[k] * X[i, k]
            margin = yi * (dot + b)
            decay = 1.0 - eta * lam
            for k in range(d):
                w[k] = w[k] * decay
            if margin < 1.0:
                ey = eta * yi
                for k in range(d):
                    w[k] = w[k] + ey * X[i, k]
                b = b + ey
            inv = 1.0 / <double>t
            for k in range(d):
                w_avg[k] = w_avg[k] + (w[k] - w_avg[k]) * inv
            b_avg = b_avg + (b - b_avg) * inv
    return b, b_avg, t
