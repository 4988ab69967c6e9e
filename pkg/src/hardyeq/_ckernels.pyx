# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures and semantics as ``_pykernels``."""

import numpy as np
from libc.math cimport pow, sqrt, isinf, INFINITY

NAME = "cython"


cdef inline double _pw(double x, double e) noexcept nogil:
    if x <= 0.0:
        return 0.0
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 0.5:
        return sqrt(x)
    return pow(x, e)


cdef void _primitive(const double[::1] h, const double[::1] lo, const double[::1] hi,
                     int inner, double[::1] H) noexcept nogil:
    cdef Py_ssize_t n = h.shape[0], i
    cdef double acc = 0.0
    if inner == 0:
        H[0] = 0.0
        for i in range(n):
            acc += h[i] * lo[i]
            H[2 * i + 1] = acc
            acc += h[i] * hi[i]
            H[2 * i + 2] = acc
    else:
        H[2 * n] = 0.0
        for i in range(n - 1, -1, -1):
            acc += h[i] * hi[i]
            H[2 * i + 1] = acc
            acc += h[i] * lo[i]
            H[2 * i] = acc


cdef void _operator(const double[::1] h, const double[::1] lo, const double[::1] hi,
                    int inner, int outer, double r, const double[::1] A, const double[::1] B,
                    const double[::1] mult, double s,
                    double[::1] H, double[::1] F, double[::1] S, double[::1] T) noexcept nogil:
    cdef Py_ssize_t n = h.shape[0], i, k
    cdef double acc, gk, gk1, ir
    _primitive(h, lo, hi, inner, H)
    for k in range(2 * n + 1):
        F[k] = mult[k] * _pw(H[k], s)
    if outer == 0:
        for i in range(n):
            T[i] = F[2 * i + 1]
        return
    ir = 1.0 / r
    # F holds G = F**r from here on; half-cell k contributes A_k G_k + B_k G_{k+1}
    for k in range(2 * n + 1):
        F[k] = _pw(F[k], r)
    if outer == 2:
        acc = 0.0
        for k in range(2 * n - 1, -1, -1):
            acc += A[k] * F[k] + B[k] * F[k + 1]
            if k % 2 == 1:
                S[(k - 1) // 2] = acc
    else:
        acc = 0.0
        for k in range(2 * n):
            if k % 2 == 1:
                S[(k - 1) // 2] = acc
            acc += A[k] * F[k] + B[k] * F[k + 1]
    for i in range(n):
        T[i] = _pw(S[i], ir)


cdef double _norm(const double[::1] T, double q, const double[::1] W) noexcept nogil:
    cdef Py_ssize_t n = T.shape[0], i
    cdef double acc = 0.0, t
    if isinf(q):
        for i in range(n):
            t = T[i] * W[i]
            if t > acc:
                acc = t
        return acc
    for i in range(n):
        acc += _pw(T[i], q) * W[i]
    return _pw(acc, 1.0 / q)


cdef double _rhs(const double[::1] h, double p, const double[::1] Vm) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(h.shape[0]):
        if h[i] > 0.0:
            acc += _pw(h[i], p) * Vm[i]
    return _pw(acc, 1.0 / p)


def primitive(const double[::1] h, const double[::1] lo, const double[::1] hi, int inner):
    H = np.empty(2 * h.shape[0] + 1)
    _primitive(h, lo, hi, inner, H)
    return H


def apply(const double[::1] h, const double[::1] lo, const double[::1] hi, int inner, int outer,
          double r, const double[::1] A, const double[::1] B, const double[::1] mult, double s):
    cdef Py_ssize_t n = h.shape[0]
    H = np.empty(2 * n + 1); F = np.empty(2 * n + 1); S = np.empty(n); T = np.empty(n)
    _operator(h, lo, hi, inner, outer, r, A, B, mult, s, H, F, S, T)
    return T


def lhs(const double[::1] h, const double[::1] lo, const double[::1] hi, int inner, int outer,
        double r, const double[::1] A, const double[::1] B, const double[::1] mult, double s,
        double q, const double[::1] W):
    cdef Py_ssize_t n = h.shape[0]
    H = np.empty(2 * n + 1); F = np.empty(2 * n + 1); S = np.empty(n); T = np.empty(n)
    _operator(h, lo, hi, inner, outer, r, A, B, mult, s, H, F, S, T)
    return _norm(T, q, W)


def rhs(const double[::1] h, double p, const double[::1] Vm):
    return _rhs(h, p, Vm)


def ratio(const double[::1] h, const double[::1] lo, const double[::1] hi, int inner, int outer,
          double r, const double[::1] A, const double[::1] B, const double[::1] mult, double s,
          double q, const double[::1] W, double p, const double[::1] Vm):
    cdef double den = _rhs(h, p, Vm)
    if den == 0.0:
        return 0.0
    return _pw(lhs(h, lo, hi, inner, outer, r, A, B, mult, s, q, W), 1.0 / s) / den


def lhs_grad(const double[::1] h, const double[::1] lo, const double[::1] hi, int inner, int outer,
             double r, const double[::1] A, const double[::1] B, const double[::1] mult, double s,
             double q, const double[::1] W):
    cdef Py_ssize_t n = h.shape[0], i, k, imax = 0
    cdef double[::1] H = np.empty(2 * n + 1)
    cdef double[::1] F = np.empty(2 * n + 1)
    cdef double[::1] S = np.empty(n)
    cdef double[::1] T = np.empty(n)
    cdef double[::1] gT = np.zeros(n)
    cdef double[::1] gF = np.zeros(2 * n + 1)
    cdef double[::1] gc = np.zeros(2 * n)
    grad_arr = np.zeros(n)
    cdef double[::1] grad = grad_arr
    cdef double val, t, best, acc, hs, Fk, ivq
    _operator(h, lo, hi, inner, outer, r, A, B, mult, s, H, F, S, T)
    val = _norm(T, q, W)
    if val == 0.0:
        return val, grad_arr
    if isinf(q):
        best = -1.0
        for i in range(n):
            t = T[i] * W[i]
            if t > best:
                best = t
                imax = i
        gT[imax] = 1.0 / T[imax]
    else:
        ivq = 1.0 / _pw(val, q)
        for i in range(n):
            gT[i] = _pw(T[i], q - 1.0) * W[i] * ivq
    # powers are recovered from stored ones where possible:
    # S**(1/r-1) = T/S, F**(r-1) = G/F, H**(s-1) = H**s/H (zero at zero)
    if outer == 0:
        for i in range(n):
            gF[2 * i + 1] = gT[i]
    else:
        # F currently holds G = (mult H**s)**r
        if outer == 2:
            acc = 0.0
            for k in range(2 * n):
                if k % 2 == 1:
                    i = (k - 1) // 2
                    if S[i] > 0.0:
                        acc += gT[i] * T[i] / S[i] / r
                gc[k] = acc
        else:
            acc = 0.0
            for k in range(2 * n - 1, -1, -1):
                if k % 2 == 0:
                    i = k // 2
                    if S[i] > 0.0:
                        acc += gT[i] * T[i] / S[i] / r
                gc[k] = acc
        for k in range(2 * n + 1):
            t = 0.0
            if k < 2 * n:
                t += A[k] * gc[k]
            if k > 0:
                t += B[k - 1] * gc[k - 1]
            Fk = mult[k] * _pw(H[k], s)
            gF[k] = t * r * F[k] / Fk if Fk > 0.0 else 0.0
    for k in range(2 * n + 1):
        if s == 1.0:
            gF[k] = gF[k] * mult[k]
        elif H[k] > 0.0:
            hs = _pw(H[k], s)
            gF[k] = gF[k] * mult[k] * s * hs / H[k]
        else:
            gF[k] = 0.0
    if inner == 0:
        # acc collects nodes k >= 2i+2
        acc = 0.0
        for i in range(n - 1, -1, -1):
            acc += gF[2 * i + 2]
            grad[i] = (lo[i] + hi[i]) * acc + lo[i] * gF[2 * i + 1]
            acc += gF[2 * i + 1]
    else:
        acc = 0.0
        for i in range(n):
            acc += gF[2 * i]
            grad[i] = (lo[i] + hi[i]) * acc + hi[i] * gF[2 * i + 1]
            acc += gF[2 * i + 1]
    return val, grad_arr


def sweep(double[::1] h, factors, const double[::1] lo, const double[::1] hi, int inner,
          int outer, double r, const double[::1] A, const double[::1] B, const double[::1] mult,
          double s, double q, const double[::1] W, double p, const double[::1] Vm):
    cdef Py_ssize_t n = h.shape[0], j, m
    cdef double[::1] H = np.empty(2 * n + 1)
    cdef double[::1] F = np.empty(2 * n + 1)
    cdef double[::1] S = np.empty(n)
    cdef double[::1] T = np.empty(n)
    cdef double[::1] fac = np.asarray(factors, dtype=float)
    cdef double best, val, old, g, den, num, hp_old, base
    cdef int side
    cdef double is_ = 1.0 / s
    # running RHS sum lets each trial cost one operator pass
    base = 0.0
    for j in range(n):
        if h[j] > 0.0:
            base += _pw(h[j], p) * Vm[j]
    if base == 0.0:
        return 0.0
    with nogil:
        _operator(h, lo, hi, inner, outer, r, A, B, mult, s, H, F, S, T)
        best = _pw(_norm(T, q, W), is_) / _pw(base, 1.0 / p)
        for j in range(n):
            if h[j] <= 0.0:
                continue
            for m in range(fac.shape[0]):
                for side in range(2):
                    g = fac[m] if side == 0 else 1.0 / fac[m]
                    old = h[j]
                    hp_old = _pw(old, p) * Vm[j]
                    h[j] = old * g
                    den = base - hp_old + _pw(h[j], p) * Vm[j]
                    _operator(h, lo, hi, inner, outer, r, A, B, mult, s, H, F, S, T)
                    num = _pw(_norm(T, q, W), is_)
                    val = num / _pw(den, 1.0 / p) if den > 0.0 else 0.0
                    if val > best:
                        best = val
                        base = den
                    else:
                        h[j] = old
    return best
